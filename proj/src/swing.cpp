#include "transwave/swing.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "transwave/error.hpp"

namespace transwave {

void SwingConfig::validate() const {
  std::ostringstream msg;
  if (!(dt > 0.0 && dt <= 0.01)) msg << " dt must be in (0, 0.01] s (got " << dt << ");";
  if (!(t_end > 0.0)) msg << " t_end must be > 0;";
  if (!(damping_d >= 0.0) || !std::isfinite(damping_d)) msg << " damping_d must be >= 0;";
  if (record_every < 1) msg << " record_every must be >= 1;";
  if (!msg.str().empty()) throw Error(ErrorKind::Configuration, "swing config:" + msg.str());
}

double line_reactance_pu(const Line& line, const SystemBases& bases) {
  return line.r_per_len * line.length / bases.z_base();
}

std::vector<double> electrical_power(const NetworkModel& model, std::span<const double> delta,
                                     std::span<const double> voltage,
                                     const std::vector<bool>& line_in_service) {
  const int n = model.bus_count();
  if (static_cast<int>(delta.size()) != n) {
    throw Error(ErrorKind::Configuration, "delta length does not match bus count");
  }
  if (!voltage.empty() && static_cast<int>(voltage.size()) != n) {
    throw Error(ErrorKind::Configuration, "voltage length does not match bus count");
  }
  std::vector<double> p(n, 0.0);
  for (int k = 0; k < model.line_count(); ++k) {
    if (!line_in_service.empty() && !line_in_service[k]) continue;
    const auto& line = model.lines[k];
    const double x = line_reactance_pu(line, model.bases);
    if (!(x > 0.0)) {
      throw Error(ErrorKind::SingularLine,
                  "line " + std::to_string(k) + " has zero series reactance");
    }
    const int i = line.from_bus;
    const int j = line.to_bus;
    const double vi = voltage.empty() ? model.buses[i].emf_pu : voltage[i];
    const double vj = voltage.empty() ? model.buses[j].emf_pu : voltage[j];
    const double flow = vi * vj / x * std::sin(delta[i] - delta[j]);
    p[i] += flow;
    p[j] -= flow;
  }
  return p;
}

SwingSystem::SwingSystem(const NetworkModel& model, std::vector<DisturbanceSpec> disturbances,
                         double damping_d)
    : model_(model),
      disturbances_(std::move(disturbances)),
      damping_(damping_d),
      omega_s_(model.bases.omega_s()) {
  require_valid(validate(model_), "swing model");
  require_valid(validate(model_, disturbances_), "swing disturbances");
  const double s_base = model_.bases.s_base;

  double capacity = 0.0;
  double load = 0.0;
  for (const auto& bus : model_.buses) {
    if (!bus.has_generator()) {
      throw Error(ErrorKind::Configuration,
                  "swing engine needs a generator (gen_rating, inertia_h) at every bus; bus " +
                      std::to_string(bus.id) + " has none");
    }
    h_agg_.push_back(bus.aggregate_inertia(model_.bases));
    capacity += *bus.gen_rating * bus.coherent_count;
    load += bus.load_p;
    p_load_.push_back(bus.load_p / s_base);
    emf_.push_back(bus.emf_pu);
  }
  const double scale = capacity > 0.0 ? load / capacity : 0.0;
  for (const auto& bus : model_.buses) {
    p_mech_.push_back(*bus.gen_rating * bus.coherent_count * scale / s_base);
  }
  for (int k = 0; k < model_.line_count(); ++k) {
    const double x = line_reactance_pu(model_.lines[k], model_.bases);
    if (!(x > 0.0)) {
      throw Error(ErrorKind::SingularLine,
                  "line " + std::to_string(k) + " has zero series reactance");
    }
    reactance_.push_back(x);
  }
}

SwingSystem::Snapshot SwingSystem::snapshot(double t) const {
  Snapshot s{p_mech_, p_load_, emf_, std::vector<bool>(model_.lines.size(), true)};
  const double s_base = model_.bases.s_base;
  for (const auto& d : disturbances_) {
    if (!d.active_at(t)) continue;
    switch (d.kind) {
      case DisturbanceKind::GenerationTrip: s.p_mech[d.target] -= d.magnitude / s_base; break;
      case DisturbanceKind::LoadShed: s.p_load[d.target] -= d.magnitude / s_base; break;
      case DisturbanceKind::LineTrip: s.in_service[d.target] = false; break;
      case DisturbanceKind::Fault: s.voltage[d.target] = 0.0; break;
    }
  }
  return s;
}

void SwingSystem::derivative(const Snapshot& snap, std::span<const double> delta,
                             std::span<const double> domega, std::span<double> d_delta,
                             std::span<double> d_domega) const {
  const int n = bus_count();
  for (int i = 0; i < n; ++i) d_domega[i] = 0.0;
  for (int k = 0; k < model_.line_count(); ++k) {
    if (!snap.in_service[k]) continue;
    const auto& line = model_.lines[k];
    const int i = line.from_bus;
    const int j = line.to_bus;
    const double flow =
        snap.voltage[i] * snap.voltage[j] / reactance_[k] * std::sin(delta[i] - delta[j]);
    d_domega[i] -= flow;
    d_domega[j] += flow;
  }
  for (int i = 0; i < n; ++i) {
    // Constant-power load, except that a collapsed bus voltage draws nothing.
    const double v_ratio = snap.voltage[i] / emf_[i];
    const double accel = snap.p_mech[i] - snap.p_load[i] * v_ratio * v_ratio + d_domega[i] -
                         damping_ * domega[i];
    d_domega[i] = accel / (2.0 * h_agg_[i]);
    d_delta[i] = omega_s_ * domega[i];
  }
}

void SwingSystem::derivative(double t_status, std::span<const double> delta,
                             std::span<const double> domega, std::span<double> d_delta,
                             std::span<double> d_domega) const {
  derivative(snapshot(t_status), delta, domega, d_delta, d_domega);
}

double SwingSystem::net_injection(double t) const {
  const auto snap = snapshot(t);
  double sum = 0.0;
  for (int i = 0; i < bus_count(); ++i) {
    const double v_ratio = snap.voltage[i] / emf_[i];
    sum += snap.p_mech[i] - snap.p_load[i] * v_ratio * v_ratio;
  }
  return sum;
}

SwingState SwingSystem::initial_state() const {
  const int n = bus_count();
  SwingState state{0.0, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  std::vector<double> mismatch(n);
  auto residual = [&] {
    auto pe = electrical_power(model_, state.delta, emf_);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      mismatch[i] = p_mech_[i] - p_load_[i] - pe[i];
      worst = std::max(worst, std::abs(mismatch[i]));
    }
    return worst;
  };
  // Newton on the sine power flow, bus 0 as angle reference.
  for (int iter = 0; iter < 50; ++iter) {
    if (residual() < 1e-12) return state;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n - 1, n - 1);
    for (int k = 0; k < model_.line_count(); ++k) {
      const auto& line = model_.lines[k];
      const int i = line.from_bus;
      const int j = line.to_bus;
      const double g = emf_[i] * emf_[j] / reactance_[k] *
                       std::cos(state.delta[i] - state.delta[j]);
      if (i > 0) jac(i - 1, i - 1) += g;
      if (j > 0) jac(j - 1, j - 1) += g;
      if (i > 0 && j > 0) {
        jac(i - 1, j - 1) -= g;
        jac(j - 1, i - 1) -= g;
      }
    }
    Eigen::VectorXd rhs(n - 1);
    for (int i = 1; i < n; ++i) rhs(i - 1) = mismatch[i];
    Eigen::VectorXd step = jac.fullPivLu().solve(rhs);
    for (int i = 1; i < n; ++i) state.delta[i] += step(i - 1);
  }
  if (residual() < 1e-9) return state;
  throw Error(ErrorKind::Configuration, "sine power flow has no steady state for this dispatch");
}

void SwingSystem::step(SwingState& state, double dt) const {
  const int n = bus_count();
  const auto snap = snapshot(state.t + 0.5 * dt);
  std::vector<double> k1d(n), k1w(n), k2d(n), k2w(n), k3d(n), k3w(n), k4d(n), k4w(n);
  std::vector<double> td(n), tw(n);

  derivative(snap, state.delta, state.domega, k1d, k1w);
  for (int i = 0; i < n; ++i) {
    td[i] = state.delta[i] + 0.5 * dt * k1d[i];
    tw[i] = state.domega[i] + 0.5 * dt * k1w[i];
  }
  derivative(snap, td, tw, k2d, k2w);
  for (int i = 0; i < n; ++i) {
    td[i] = state.delta[i] + 0.5 * dt * k2d[i];
    tw[i] = state.domega[i] + 0.5 * dt * k2w[i];
  }
  derivative(snap, td, tw, k3d, k3w);
  for (int i = 0; i < n; ++i) {
    td[i] = state.delta[i] + dt * k3d[i];
    tw[i] = state.domega[i] + dt * k3w[i];
  }
  derivative(snap, td, tw, k4d, k4w);
  for (int i = 0; i < n; ++i) {
    state.delta[i] += dt / 6.0 * (k1d[i] + 2.0 * k2d[i] + 2.0 * k3d[i] + k4d[i]);
    state.domega[i] += dt / 6.0 * (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i]);
  }
  state.t += dt;

  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(state.delta[i]) || !std::isfinite(state.domega[i])) {
      std::ostringstream msg;
      msg << "swing integration diverged at bus " << i << ", t=" << state.t << " s";
      throw DivergenceError("swing", i, state.t, msg.str());
    }
  }
}

SwingState swing_step(const NetworkModel& model, const SwingState& state,
                      const SwingConfig& config, const std::vector<DisturbanceSpec>& disturbances) {
  config.validate();
  if (static_cast<int>(state.delta.size()) != model.bus_count() ||
      static_cast<int>(state.domega.size()) != model.bus_count()) {
    throw Error(ErrorKind::Configuration, "swing state does not match the model's bus count");
  }
  SwingSystem system(model, disturbances, config.damping_d);
  SwingState next = state;
  system.step(next, config.dt);
  return next;
}

TimeSeriesSet run_swing(const NetworkModel& model, const SwingConfig& config,
                        const std::vector<DisturbanceSpec>& disturbances) {
  config.validate();
  SwingSystem system(model, disturbances, config.damping_d);
  const int n = system.bus_count();
  const auto steps = static_cast<long>(std::llround(config.t_end / config.dt));

  TimeSeriesSet series;
  std::vector<Channel*> delta_ch, domega_ch;
  for (int i = 0; i < n; ++i) {
    series.add_channel(i, Quantity::Delta);
    series.add_channel(i, Quantity::Domega);
  }
  for (int i = 0; i < n; ++i) {
    delta_ch.push_back(series.find(i, Quantity::Delta));
    domega_ch.push_back(series.find(i, Quantity::Domega));
  }
  const auto rows = static_cast<std::size_t>(steps / config.record_every + 1);
  series.times().reserve(rows);
  for (auto* c : delta_ch) c->values.reserve(rows);
  for (auto* c : domega_ch) c->values.reserve(rows);

  auto record = [&](const SwingState& s, long k) {
    series.times().push_back(k * config.dt);
    for (int i = 0; i < n; ++i) {
      delta_ch[i]->values.push_back(s.delta[i]);
      domega_ch[i]->values.push_back(s.domega[i]);
    }
  };

  SwingState state = system.initial_state();
  record(state, 0);
  for (long k = 1; k <= steps; ++k) {
    system.step(state, config.dt);
    // Re-anchor time to the step grid so long runs do not accumulate drift.
    state.t = k * config.dt;
    if (k % config.record_every == 0) record(state, k);
  }
  return series;
}

}  // namespace transwave
