#include "transwave/emt.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "transwave/error.hpp"

namespace transwave {

double propagation_speed_em(const Line& line) {
  if (!(line.l_per_len > 0.0) || !(line.c_per_len > 0.0)) {
    throw Error(ErrorKind::Domain, "propagation speed needs l_per_len > 0 and c_per_len > 0");
  }
  return 1.0 / std::sqrt(line.l_per_len * line.c_per_len);
}

double propagation_speed_em_kms(const Line& line) {
  const double v = propagation_speed_em(line);
  return line.len_unit_em == LengthUnit::Meter ? v / 1000.0 : v;
}

double surge_impedance(const Line& line) {
  if (!(line.l_per_len > 0.0) || !(line.c_per_len > 0.0)) {
    throw Error(ErrorKind::Domain, "surge impedance needs l_per_len > 0 and c_per_len > 0");
  }
  return std::sqrt(line.l_per_len / line.c_per_len);
}

double travel_time(const Line& line) { return line.em_length() / propagation_speed_em(line); }

namespace emt {

BergeronLine::BergeronLine(int from, int to, double zc, double tau, double dt)
    : from_(from), to_(to), zc_(zc), tau_(tau), dt_(dt) {
  if (!(zc > 0.0) || !(tau > 0.0)) {
    throw Error(ErrorKind::Domain, "Bergeron line needs zc > 0 and tau > 0");
  }
  const double ratio = tau / dt;
  if (ratio < 1.0 - 1e-9) {
    std::ostringstream msg;
    msg << "time step " << dt << " s exceeds line travel time " << tau << " s";
    throw Error(ErrorKind::Configuration, msg.str());
  }
  whole_ = static_cast<int>(std::floor(ratio + 1e-9));
  frac_ = std::max(0.0, ratio - whole_);
  if (frac_ < 1e-9) frac_ = 0.0;
  depth_ = whole_ + 1;
  buf_[0].assign(depth_, 0.0);
  buf_[1].assign(depth_, 0.0);
}

double BergeronLine::delayed_wave(int end) const {
  const auto& b = buf_[end];
  // Slot 1 sits exactly `whole_` steps before the next sample, slot 0 one step earlier.
  return (1.0 - frac_) * b[slot(1 % depth_)] + frac_ * b[slot(0)];
}

void BergeronLine::push(double b_from, double b_to) {
  buf_[0][head_] = b_from;
  buf_[1][head_] = b_to;
  head_ = (head_ + 1) % depth_;
}

void BergeronLine::clear() {
  std::fill(buf_[0].begin(), buf_[0].end(), 0.0);
  std::fill(buf_[1].begin(), buf_[1].end(), 0.0);
}

double BergeronLine::stored_energy() const {
  double sum = 0.0;
  for (int end = 0; end < 2; ++end) {
    for (int k = 1; k < depth_; ++k) sum += buf_[end][slot(k)] * buf_[end][slot(k)];
    sum += frac_ * buf_[end][slot(0)] * buf_[end][slot(0)];
  }
  // Forward wave voltage is zc*b/2; its power is (zc b / 2)^2 / zc.
  return 0.25 * zc_ * dt_ * sum;
}

Circuit::Circuit(int node_count, double dt, double t_start)
    : n_(node_count), dt_(dt), t_start_(t_start), v_(Eigen::VectorXd::Zero(node_count)) {
  if (node_count < 1) throw Error(ErrorKind::Configuration, "circuit needs at least one node");
  if (!(dt > 0.0)) throw Error(ErrorKind::Configuration, "time step must be > 0");
}

void Circuit::check_node(int node) const {
  if (node != kGround && (node < 0 || node >= n_)) {
    throw Error(ErrorKind::Configuration, "no such node " + std::to_string(node));
  }
}

int Circuit::add_resistor(int a, int b, double r) {
  check_node(a);
  check_node(b);
  if (!(r > 0.0)) throw Error(ErrorKind::Domain, "resistance must be > 0");
  branches_.push_back({Branch::Kind::Resistor, a, b, r});
  dirty_ = true;
  return static_cast<int>(branches_.size()) - 1;
}

int Circuit::add_inductor(int a, int b, double l) {
  check_node(a);
  check_node(b);
  if (!(l > 0.0)) throw Error(ErrorKind::Domain, "inductance must be > 0");
  branches_.push_back({Branch::Kind::Inductor, a, b, l});
  dirty_ = true;
  return static_cast<int>(branches_.size()) - 1;
}

int Circuit::add_capacitor(int a, int b, double c) {
  check_node(a);
  check_node(b);
  if (!(c > 0.0)) throw Error(ErrorKind::Domain, "capacitance must be > 0");
  branches_.push_back({Branch::Kind::Capacitor, a, b, c});
  dirty_ = true;
  return static_cast<int>(branches_.size()) - 1;
}

int Circuit::add_switch(int a, int b, double r_closed, bool closed) {
  check_node(a);
  check_node(b);
  if (!(r_closed > 0.0)) throw Error(ErrorKind::Domain, "switch resistance must be > 0");
  Branch br{Branch::Kind::Switch, a, b, r_closed};
  br.closed = closed;
  branches_.push_back(br);
  dirty_ = true;
  return static_cast<int>(branches_.size()) - 1;
}

int Circuit::add_line(int a, int b, double zc, double tau) {
  check_node(a);
  check_node(b);
  lines_.push_back({BergeronLine(a, b, zc, tau, dt_)});
  dirty_ = true;
  return static_cast<int>(lines_.size()) - 1;
}

int Circuit::add_source(int node, SourceWave wave, double r, double l) {
  check_node(node);
  if (node == kGround) throw Error(ErrorKind::Configuration, "source cannot drive ground");
  if (!(r >= 0.0) || !(l >= 0.0)) throw Error(ErrorKind::Domain, "source R and L must be >= 0");
  for (const auto& s : sources_) {
    if (s.node == node && (s.ideal() || (r == 0.0 && l == 0.0))) {
      throw Error(ErrorKind::Configuration,
                  "ideal source at node " + std::to_string(node) + " conflicts with another source");
    }
  }
  Source s{node, std::move(wave), r, l};
  if (l > 0.0) {
    const double k = 2.0 * l / dt_;
    s.g = 1.0 / (k + r);
    s.a = (k - r) / (k + r);
  } else if (r > 0.0) {
    s.g = 1.0 / r;
  }
  sources_.push_back(std::move(s));
  dirty_ = true;
  return static_cast<int>(sources_.size()) - 1;
}

void Circuit::set_switch(int id, bool closed) {
  auto& br = branches_.at(id);
  if (br.kind != Branch::Kind::Switch) throw Error(ErrorKind::Configuration, "not a switch");
  if (br.closed != closed) {
    br.closed = closed;
    if (!closed) br.i = 0.0;
    dirty_ = true;
  }
}

void Circuit::set_resistance(int id, double r) {
  auto& br = branches_.at(id);
  if (br.kind != Branch::Kind::Resistor && br.kind != Branch::Kind::Switch) {
    throw Error(ErrorKind::Configuration, "not a resistive branch");
  }
  if (!(r > 0.0)) throw Error(ErrorKind::Domain, "resistance must be > 0");
  br.value = r;
  dirty_ = true;
}

void Circuit::set_line_in_service(int id, bool in_service) {
  auto& slot = lines_.at(id);
  if (slot.in_service == in_service) return;
  slot.in_service = in_service;
  slot.model.clear();
  slot.hist[0] = slot.hist[1] = 0.0;
  dirty_ = true;
}

double Circuit::branch_conductance(const Branch& br) const {
  switch (br.kind) {
    case Branch::Kind::Resistor: return std::isinf(br.value) ? 0.0 : 1.0 / br.value;
    case Branch::Kind::Switch: return br.closed ? 1.0 / br.value : 0.0;
    case Branch::Kind::Inductor: return dt_ / (2.0 * br.value);
    case Branch::Kind::Capacitor: return 2.0 * br.value / dt_;
  }
  return 0.0;
}

void Circuit::stamp(Eigen::MatrixXd& g, int a, int b, double value) const {
  if (a != kGround) g(a, a) += value;
  if (b != kGround) g(b, b) += value;
  if (a != kGround && b != kGround) {
    g(a, b) -= value;
    g(b, a) -= value;
  }
}

void Circuit::refactor() {
  g_full_ = Eigen::MatrixXd::Zero(n_, n_);
  for (auto& br : branches_) {
    br.g = branch_conductance(br);
    stamp(g_full_, br.a, br.b, br.g);
  }
  for (const auto& slot : lines_) {
    if (!slot.in_service) continue;
    const double y = 1.0 / slot.model.zc();
    stamp(g_full_, slot.model.from(), kGround, y);
    stamp(g_full_, slot.model.to(), kGround, y);
  }
  fixed_by_.assign(n_, -1);
  for (std::size_t k = 0; k < sources_.size(); ++k) {
    const auto& s = sources_[k];
    if (s.ideal()) {
      fixed_by_[s.node] = static_cast<int>(k);
    } else {
      g_full_(s.node, s.node) += s.g;
    }
  }
  unknown_.assign(n_, -1);
  int m = 0;
  for (int i = 0; i < n_; ++i) {
    if (fixed_by_[i] < 0) unknown_[i] = m++;
  }
  unknown_count_ = m;
  if (m > 0) {
    Eigen::MatrixXd guu(m, m);
    for (int i = 0; i < n_; ++i) {
      if (unknown_[i] < 0) continue;
      if (!(g_full_(i, i) > 0.0)) {
        throw Error(ErrorKind::IsolatedNode,
                    "node " + std::to_string(i) + " has no conductive path (isolated node)");
      }
      for (int j = 0; j < n_; ++j) {
        if (unknown_[j] >= 0) guu(unknown_[i], unknown_[j]) = g_full_(i, j);
      }
    }
    factor_.compute(guu);
    if (factor_.info() != Eigen::Success) {
      throw Error(ErrorKind::IsolatedNode, "conductance matrix is singular (isolated subnetwork)");
    }
  }
  dirty_ = false;
}

void Circuit::initialize_steady_state(double omega) {
  using cd = std::complex<double>;
  const cd j(0.0, 1.0);
  const double warp = 2.0 / dt_ * std::tan(0.5 * omega * dt_);  // trapezoidal frequency warping
  const double t0 = time();

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n_, n_);
  Eigen::VectorXcd inj = Eigen::VectorXcd::Zero(n_);
  auto stamp_c = [&](int a, int b, cd val) {
    if (a != kGround) y(a, a) += val;
    if (b != kGround) y(b, b) += val;
    if (a != kGround && b != kGround) {
      y(a, b) -= val;
      y(b, a) -= val;
    }
  };
  auto branch_admittance = [&](const Branch& br) -> cd {
    switch (br.kind) {
      case Branch::Kind::Resistor: return std::isinf(br.value) ? 0.0 : 1.0 / br.value;
      case Branch::Kind::Switch: return br.closed ? 1.0 / br.value : 0.0;
      case Branch::Kind::Inductor: return 1.0 / (j * warp * br.value);
      case Branch::Kind::Capacitor: return j * warp * br.value;
    }
    return 0.0;
  };
  for (const auto& br : branches_) stamp_c(br.a, br.b, branch_admittance(br));
  for (const auto& slot : lines_) {
    if (!slot.in_service) continue;
    const double theta = omega * slot.model.tau();
    const double z = slot.model.zc();
    stamp_c(slot.model.from(), slot.model.to(), 1.0 / (j * z * std::sin(theta)));
    const cd shunt = j * std::tan(0.5 * theta) / z;
    stamp_c(slot.model.from(), kGround, shunt);
    stamp_c(slot.model.to(), kGround, shunt);
  }
  std::vector<cd> emf(sources_.size());
  std::vector<cd> zs(sources_.size());
  std::vector<bool> fixed(n_, false);
  Eigen::VectorXcd vph = Eigen::VectorXcd::Zero(n_);
  for (std::size_t k = 0; k < sources_.size(); ++k) {
    const auto& s = sources_[k];
    if (s.wave.custom) {
      throw Error(ErrorKind::Configuration, "steady-state initialization needs sinusoidal sources");
    }
    emf[k] = s.wave.amplitude * std::exp(j * (s.wave.phase - 0.5 * std::numbers::pi));
    if (s.ideal()) {
      fixed[s.node] = true;
      vph(s.node) = emf[k];
    } else {
      zs[k] = s.r + j * warp * s.l;
      y(s.node, s.node) += 1.0 / zs[k];
      inj(s.node) += emf[k] / zs[k];
    }
  }
  std::vector<int> idx(n_, -1);
  int m = 0;
  for (int i = 0; i < n_; ++i) {
    if (!fixed[i]) idx[i] = m++;
  }
  if (m > 0) {
    Eigen::MatrixXcd yuu(m, m);
    Eigen::VectorXcd rhs(m);
    for (int i = 0; i < n_; ++i) {
      if (idx[i] < 0) continue;
      rhs(idx[i]) = inj(i);
      for (int k = 0; k < n_; ++k) {
        if (idx[k] >= 0) {
          yuu(idx[i], idx[k]) = y(i, k);
        } else {
          rhs(idx[i]) -= y(i, k) * vph(k);
        }
      }
    }
    Eigen::VectorXcd sol = yuu.fullPivLu().solve(rhs);
    for (int i = 0; i < n_; ++i) {
      if (idx[i] >= 0) vph(i) = sol(idx[i]);
    }
  }

  auto at = [&](cd phasor, double t) { return std::real(phasor * std::exp(j * omega * t)); };
  auto node_v = [&](int node) -> cd { return node == kGround ? cd(0.0) : vph(node); };

  for (int i = 0; i < n_; ++i) v_(i) = at(vph(i), t0);
  for (auto& br : branches_) {
    const cd vab = node_v(br.a) - node_v(br.b);
    br.v = at(vab, t0);
    br.i = at(vab * branch_admittance(br), t0);
  }
  for (auto& slot : lines_) {
    if (!slot.in_service) continue;
    const double theta = omega * slot.model.tau();
    const double z = slot.model.zc();
    const cd vk = node_v(slot.model.from());
    const cd vm = node_v(slot.model.to());
    const cd ik = (vk * std::cos(theta) - vm) / (j * z * std::sin(theta));
    const cd im = (vm * std::cos(theta) - vk) / (j * z * std::sin(theta));
    const cd wave[2] = {vk / z + ik, vm / z + im};
    slot.model.fill_history([&](int end, double offset) { return at(wave[end], t0 + offset); });
    slot.hist[0] = at(ik, t0) - at(vk, t0) / z;
    slot.hist[1] = at(im, t0) - at(vm, t0) / z;
  }
  for (std::size_t k = 0; k < sources_.size(); ++k) {
    auto& s = sources_[k];
    s.e = s.wave(t0);
    if (s.ideal()) continue;
    const cd u = emf[k] - vph(s.node);
    s.u = at(u, t0);
    s.i = at(u / zs[k], t0);
  }
  dirty_ = true;
}

void Circuit::step() {
  if (dirty_) refactor();
  const double t_next = time() + dt_;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_);
  auto inject_pair = [&](int a, int b, double hist) {
    // History current flowing a -> b.
    if (a != kGround) rhs(a) -= hist;
    if (b != kGround) rhs(b) += hist;
  };

  std::vector<double> branch_hist(branches_.size(), 0.0);
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    const auto& br = branches_[k];
    if (br.kind == Branch::Kind::Inductor) {
      branch_hist[k] = br.i + br.g * br.v;
    } else if (br.kind == Branch::Kind::Capacitor) {
      branch_hist[k] = -br.i - br.g * br.v;
    }
    if (branch_hist[k] != 0.0) inject_pair(br.a, br.b, branch_hist[k]);
  }
  for (auto& slot : lines_) {
    if (!slot.in_service) continue;
    slot.hist[0] = -slot.model.delayed_wave(1);
    slot.hist[1] = -slot.model.delayed_wave(0);
    inject_pair(slot.model.from(), kGround, slot.hist[0]);
    inject_pair(slot.model.to(), kGround, slot.hist[1]);
  }
  Eigen::VectorXd v_next = Eigen::VectorXd::Zero(n_);
  std::vector<double> source_hist(sources_.size(), 0.0);
  for (std::size_t k = 0; k < sources_.size(); ++k) {
    auto& s = sources_[k];
    s.e = s.wave(t_next);
    if (s.ideal()) {
      v_next(s.node) = s.e;
      continue;
    }
    source_hist[k] = s.l > 0.0 ? s.g * s.u + s.a * s.i : 0.0;
    rhs(s.node) += s.g * s.e + source_hist[k];
  }

  const int m = unknown_count_;
  if (m > 0) {
    Eigen::VectorXd rhs_u(m);
    for (int i = 0; i < n_; ++i) {
      if (unknown_[i] < 0) continue;
      double r = rhs(i);
      for (int k = 0; k < n_; ++k) {
        if (unknown_[k] < 0 && g_full_(i, k) != 0.0) r -= g_full_(i, k) * v_next(k);
      }
      rhs_u(unknown_[i]) = r;
    }
    Eigen::VectorXd sol = factor_.solve(rhs_u);
    for (int i = 0; i < n_; ++i) {
      if (unknown_[i] >= 0) v_next(i) = sol(unknown_[i]);
    }
  }
  v_ = v_next;
  for (int i = 0; i < n_; ++i) {
    if (!std::isfinite(v_(i))) {
      std::ostringstream msg;
      msg << "EMT solution diverged at node " << i << ", t=" << t_next << " s";
      throw DivergenceError("emt", i, t_next, msg.str());
    }
  }

  auto node_v = [&](int node) { return node == kGround ? 0.0 : v_(node); };
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    auto& br = branches_[k];
    br.v = node_v(br.a) - node_v(br.b);
    br.i = br.g * br.v + branch_hist[k];
  }
  for (auto& slot : lines_) {
    if (!slot.in_service) continue;
    const double z = slot.model.zc();
    const double vf = node_v(slot.model.from());
    const double vt = node_v(slot.model.to());
    const double i_from = vf / z + slot.hist[0];
    const double i_to = vt / z + slot.hist[1];
    slot.model.push(vf / z + i_from, vt / z + i_to);
  }
  for (std::size_t k = 0; k < sources_.size(); ++k) {
    auto& s = sources_[k];
    if (s.ideal()) {
      // Whatever leaves the node through the other elements.
      s.i = g_full_.row(s.node).dot(v_) - rhs(s.node);
      continue;
    }
    s.u = s.e - v_(s.node);
    s.i = s.g * s.u + source_hist[k];
  }
  ++step_;
}

double Circuit::line_current(int id, int end) const {
  const auto& slot = lines_.at(id);
  if (!slot.in_service) return 0.0;
  const int node = end == 0 ? slot.model.from() : slot.model.to();
  return voltage(node) / slot.model.zc() + slot.hist[end];
}

double Circuit::stored_line_energy() const {
  double sum = 0.0;
  for (const auto& slot : lines_) {
    if (slot.in_service) sum += slot.model.stored_energy();
  }
  return sum;
}

}  // namespace emt

double min_travel_time(const NetworkModel& model) {
  double tau = std::numeric_limits<double>::infinity();
  for (const auto& line : model.lines) tau = std::min(tau, travel_time(line));
  return tau;
}

double EmtConfig::resolve_dt(const NetworkModel& model) const {
  const double tau_min = min_travel_time(model);
  const double step = dt > 0.0 ? dt : std::min(tau_min / 10.0, 1e-6);
  std::ostringstream msg;
  if (!(step > 0.0) || step > tau_min * (1.0 + 1e-9)) {
    msg << " dt=" << step << " s must be in (0, tau_min=" << tau_min << " s];";
  }
  if (!(t_end > 0.0)) msg << " t_end must be > 0;";
  if (!(source_resistance >= 0.0) || !(source_xd_pu >= 0.0)) {
    msg << " source impedance must be >= 0;";
  }
  if (source_resistance == 0.0 && source_xd_pu == 0.0) {
    msg << " generator sources need a nonzero series impedance;";
  }
  if (!(preroll_cycles >= 5.0)) msg << " preroll_cycles must be >= 5;";
  if (record_every < 1) msg << " record_every must be >= 1;";
  if (!msg.str().empty()) throw Error(ErrorKind::Configuration, "emt config:" + msg.str());
  return step;
}

double load_resistance(const SystemBases& bases, double p_mw) {
  if (!(p_mw > 0.0)) return std::numeric_limits<double>::infinity();
  const double v = bases.v_base * 1e3;
  return v * v / (p_mw * 1e6);
}

EmtNetwork::EmtNetwork(const NetworkModel& model, const EmtConfig& config, double dt,
                       double t_start, const std::vector<DisturbanceSpec>& disturbances)
    : circuit(model.bus_count(), dt, t_start) {
  require_valid(validate(model), "emt model");
  require_valid(validate(model, disturbances), "emt disturbances");
  const auto& bases = model.bases;
  const double omega = bases.omega_s();
  v_peak_nominal = std::sqrt(2.0) * bases.v_base * 1e3;

  for (const auto& bus : model.buses) {
    if (bus.has_generator()) {
      emt::SourceWave wave{bus.emf_pu * v_peak_nominal, omega, 0.0, {}};
      const double rating = *bus.gen_rating * bus.coherent_count;  // MVA
      const double x_ohm = config.source_xd_pu * bases.v_base * bases.v_base / rating;
      source_of_bus.push_back(
          circuit.add_source(bus.id, wave, config.source_resistance, x_ohm / omega));
    } else {
      source_of_bus.push_back(-1);
    }
    load_of_bus.push_back(bus.load_p > 0.0
                              ? circuit.add_resistor(bus.id, emt::kGround,
                                                     load_resistance(bases, bus.load_p))
                              : -1);
  }
  for (const auto& line : model.lines) {
    line_id.push_back(
        circuit.add_line(line.from_bus, line.to_bus, surge_impedance(line), travel_time(line)));
  }
  for (const auto& d : disturbances) {
    if (d.kind == DisturbanceKind::Fault) {
      const double r_fault = std::max(d.magnitude, 1e-6);
      fault_switch.push_back(circuit.add_switch(d.target, emt::kGround, r_fault, false));
    } else {
      fault_switch.push_back(-1);
    }
  }
}

bool apply_emt_events(EmtNetwork& net, const NetworkModel& model,
                      const std::vector<DisturbanceSpec>& disturbances, double t_next,
                      std::vector<int>& stage) {
  const double eps = 1e-3 * net.circuit.dt();
  bool changed = false;
  for (std::size_t k = 0; k < disturbances.size(); ++k) {
    const auto& d = disturbances[k];
    if (stage[k] == 0 && t_next >= d.t_onset - eps) {
      stage[k] = 1;
      changed = true;
      switch (d.kind) {
        case DisturbanceKind::Fault: net.circuit.set_switch(net.fault_switch[k], true); break;
        case DisturbanceKind::LineTrip:
          net.circuit.set_line_in_service(net.line_id[d.target], false);
          break;
        case DisturbanceKind::LoadShed: {
          const int id = net.load_of_bus[d.target];
          if (id >= 0) {
            const double remaining = model.buses[d.target].load_p - d.magnitude;
            const double r = load_resistance(model.bases, remaining);
            net.circuit.set_resistance(id, r);
          }
          break;
        }
        case DisturbanceKind::GenerationTrip: break;  // mechanical; handled by the swing side
      }
    }
    if (stage[k] == 1 && d.kind == DisturbanceKind::Fault &&
        t_next >= d.t_onset + d.duration - eps) {
      stage[k] = 2;
      changed = true;
      net.circuit.set_switch(net.fault_switch[k], false);
    }
  }
  return changed;
}

TimeSeriesSet run_emt(const NetworkModel& model, const EmtConfig& config,
                      const std::vector<DisturbanceSpec>& disturbances) {
  require_valid(validate(model), "emt model");
  for (const auto& d : disturbances) {
    if (d.kind == DisturbanceKind::GenerationTrip) {
      throw Error(ErrorKind::Configuration,
                  "generation_trip has no electromagnetic effect; use the swing or hybrid engine");
    }
  }
  const double dt = config.resolve_dt(model);
  const double f = model.bases.f_nominal;
  const long preroll = std::lround(config.preroll_cycles / f / dt);
  const long steps = std::lround(config.t_end / dt);

  EmtNetwork net(model, config, dt, -static_cast<double>(preroll) * dt, disturbances);
  net.circuit.initialize_steady_state(model.bases.omega_s());

  const int n = model.bus_count();
  TimeSeriesSet series;
  for (int i = 0; i < n; ++i) series.add_channel(i, Quantity::Voltage);
  std::vector<std::vector<double>*> cols;
  for (auto& c : series.channels()) cols.push_back(&c.values);
  const auto rows = static_cast<std::size_t>(steps / config.record_every + 1);
  series.times().reserve(rows);
  for (auto* c : cols) c->reserve(rows);

  std::vector<int> stage(disturbances.size(), 0);
  for (long k = -preroll; k <= steps; ++k) {
    if (k > -preroll) {
      apply_emt_events(net, model, disturbances, k * dt, stage);
      net.circuit.step();
    }
    if (k >= 0 && k % config.record_every == 0) {
      series.times().push_back(k * dt);
      for (int i = 0; i < n; ++i) cols[i]->push_back(net.circuit.voltage(i));
    }
  }
  return series;
}

}  // namespace transwave
