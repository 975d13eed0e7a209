#include "transwave/wave_analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "transwave/error.hpp"

namespace transwave {

double inertia_density(double h_const, double coh, double n_groups, double g_mw, double s_base,
                       double line_km) {
  if (!(n_groups >= 2.0)) {
    throw Error(ErrorKind::Domain, "inertia_density: n_groups must be >= 2 (divides by N - 1)");
  }
  if (!(h_const > 0.0 && coh > 0.0 && g_mw > 0.0 && s_base > 0.0 && line_km > 0.0)) {
    throw Error(ErrorKind::Domain, "inertia_density: H, coh, G, s_base and length must be > 0");
  }
  return h_const * coh * n_groups * g_mw / (s_base * line_km * (n_groups - 1.0));
}

double speed_mech_theory(const TheoryInputs& in) {
  if (!(in.theta > 0.0 && in.theta <= std::numbers::pi)) {
    throw Error(ErrorKind::Domain, "speed_mech_theory: theta must lie in (0, pi]");
  }
  const double num = in.omega * in.v_pu * in.v_pu * std::sin(in.theta);
  const double den = 2.0 * in.h * in.z_abs;
  if (!(num > 0.0) || !(den > 0.0)) {
    throw Error(ErrorKind::Domain, "speed_mech_theory: radicand must be positive");
  }
  return std::sqrt(num / den);
}

TheoryReport theory_report(const NetworkModel& model) {
  double h_sum = 0.0, coh_sum = 0.0, g_sum = 0.0, v_sum = 0.0;
  int groups = 0;
  for (const auto& bus : model.buses) {
    if (!bus.gen_rating || !bus.inertia_h) continue;
    h_sum += *bus.inertia_h;
    coh_sum += bus.coherent_count;
    g_sum += *bus.gen_rating;
    v_sum += bus.emf_pu;
    ++groups;
  }
  if (groups == 0) {
    throw Error(ErrorKind::Configuration,
                "theory needs generator buses: no bus defines both gen_rating and inertia_h");
  }
  if (model.lines.empty()) throw Error(ErrorKind::Configuration, "theory needs at least one line");
  double len = 0.0, r = 0.0, l = 0.0, c = 0.0;
  for (const auto& line : model.lines) {
    len += line.length;
    r += line.r_per_len;
    l += line.l_per_len;
    c += line.c_per_len;
  }
  const double m = static_cast<double>(model.lines.size());
  Line mean_line = model.lines.front();
  mean_line.length = len / m;
  mean_line.r_per_len = r / m;
  mean_line.l_per_len = l / m;
  mean_line.c_per_len = c / m;

  TheoryReport rep;
  rep.h_s_per_km = inertia_density(h_sum / groups, coh_sum / groups, groups, g_sum / groups,
                                   model.bases.s_base, mean_line.length);
  rep.inputs.omega = model.bases.omega_s();
  rep.inputs.v_pu = v_sum / groups;
  rep.inputs.theta = std::numbers::pi / 2.0;
  rep.inputs.h = rep.h_s_per_km;
  rep.inputs.z_abs = mean_line.r_per_len / model.bases.z_base();
  rep.v_mech_kms = speed_mech_theory(rep.inputs);
  rep.v_em_ms = propagation_speed_em_kms(mean_line) * 1e3;
  return rep;
}

int ArrivalReport::detected() const {
  return static_cast<int>(std::count_if(buses.begin(), buses.end(),
                                        [](const BusArrival& b) { return b.arrival_t.has_value(); }));
}

const BusArrival& ArrivalReport::at(int bus) const {
  for (const auto& b : buses) {
    if (b.bus == bus) return b;
  }
  throw Error(ErrorKind::Configuration, "arrival report has no bus " + std::to_string(bus));
}

double default_threshold(Quantity q, const NetworkModel& model) {
  if (q == Quantity::Voltage) return 0.02 * std::sqrt(2.0) * model.bases.v_base * 1e3;
  return 1e-4;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) {
    throw Error(ErrorKind::InsufficientArrivals, "line fit needs at least two points");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw Error(ErrorKind::InsufficientArrivals, "line fit: all arrival times are identical");
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    ss_res += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

namespace {

// Linear interpolation on a uniform grid starting at t0.
double sample_at(std::span<const double> x, double t0, double dt, double t) {
  const double pos = (t - t0) / dt;
  auto k = static_cast<std::ptrdiff_t>(std::floor(pos));
  k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(x.size()) - 2);
  const double w = pos - static_cast<double>(k);
  return (1.0 - w) * x[k] + w * x[k + 1];
}

}  // namespace

ArrivalReport detect_arrivals(const TimeSeriesSet& series, Quantity quantity, int origin,
                              const NetworkModel& model, double threshold, double t_onset) {
  if (!(threshold > 0.0)) throw Error(ErrorKind::Configuration, "arrival threshold must be > 0");
  if (origin < 0 || origin >= model.bus_count()) {
    throw Error(ErrorKind::Configuration, "origin bus " + std::to_string(origin) + " not in model");
  }
  const auto& t = series.times();
  if (t.size() < 2) throw Error(ErrorKind::Configuration, "series needs at least two samples");
  const double dt = series.sample_interval();

  // Index of the first sample at or after the onset.
  const double eps_t = 1e-9 * dt;
  std::size_t k_on = 0;
  while (k_on < t.size() && t[k_on] < t_onset - eps_t) ++k_on;

  const double period = 1.0 / model.bases.f_nominal;
  const bool periodic = quantity == Quantity::Voltage;
  if (periodic && t.front() > t_onset - period + eps_t) {
    std::ostringstream msg;
    msg << "voltage arrivals need one fundamental cycle (" << period
        << " s) of data before the onset t=" << t_onset << " s";
    throw Error(ErrorKind::Configuration, msg.str());
  }

  ArrivalReport rep;
  rep.quantity = quantity;
  rep.origin = origin;
  rep.threshold = threshold;
  rep.t_onset = t_onset;
  const auto dist = path_distances(model, origin);
  std::vector<double> xs, ys;
  for (int b = 0; b < model.bus_count(); ++b) {
    auto x = series.values(b, quantity);
    BusArrival ba;
    ba.bus = b;
    ba.distance_km = dist[b];
    const double hold = x[k_on > 0 ? k_on - 1 : 0];
    auto baseline = [&](std::size_t k) {
      if (!periodic) return hold;
      const double shift = std::ceil((t[k] - t_onset + eps_t) / period) * period;
      return sample_at(x, t.front(), dt, t[k] - shift);
    };
    double prev_dev = k_on > 0 ? std::abs(x[k_on - 1] - baseline(k_on - 1)) : 0.0;
    for (std::size_t k = k_on; k < t.size(); ++k) {
      const double dev = std::abs(x[k] - baseline(k));
      if (dev > threshold) {
        double ta = t[k];
        if (k > 0 && dev > prev_dev && prev_dev <= threshold) {
          ta = t[k - 1] + (threshold - prev_dev) / (dev - prev_dev) * (t[k] - t[k - 1]);
        }
        ba.arrival_t = std::max(ta, t_onset);
        break;
      }
      prev_dev = dev;
    }
    if (ba.arrival_t && std::isfinite(ba.distance_km)) {
      xs.push_back(*ba.arrival_t);
      ys.push_back(ba.distance_km);
    }
    rep.buses.push_back(ba);
  }
  if (xs.size() < 2) {
    throw Error(ErrorKind::InsufficientArrivals,
                "only " + std::to_string(xs.size()) + " bus(es) crossed the threshold " +
                    std::to_string(threshold) + "; need at least 2");
  }
  const auto fit = fit_line(xs, ys);
  rep.fitted_speed_kms = fit.slope;
  rep.fit_intercept_km = fit.intercept;
  rep.fit_r2 = fit.r2;
  return rep;
}

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::InertiaH: return "inertia_h";
    case SweepParameter::LPerLen: return "l_per_len";
    case SweepParameter::CPerLen: return "c_per_len";
  }
  return "?";
}

std::optional<SweepParameter> parse_sweep_parameter(const std::string& text) {
  for (auto p : {SweepParameter::InertiaH, SweepParameter::LPerLen, SweepParameter::CPerLen}) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

const char* to_string(SweepEngine e) { return e == SweepEngine::Swing ? "swing" : "emt"; }

std::optional<SweepEngine> parse_sweep_engine(const std::string& text) {
  if (text == "swing") return SweepEngine::Swing;
  if (text == "emt") return SweepEngine::Emt;
  return std::nullopt;
}

NetworkModel with_parameter(const NetworkModel& base, SweepParameter p, double value) {
  if (!(value > 0.0)) throw Error(ErrorKind::Configuration, "sweep values must be > 0");
  NetworkModel m = base;
  switch (p) {
    case SweepParameter::InertiaH:
      for (auto& bus : m.buses) {
        if (bus.inertia_h) bus.inertia_h = value;
      }
      break;
    case SweepParameter::LPerLen:
      for (auto& line : m.lines) {
        line.r_per_len *= value / line.l_per_len;
        line.l_per_len = value;
      }
      break;
    case SweepParameter::CPerLen:
      for (auto& line : m.lines) line.c_per_len = value;
      break;
  }
  return m;
}

int sweep_thread_count(int requested, std::size_t jobs) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TRANSWAVE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(jobs, 1)));
}

namespace {

SweepPoint run_sweep_point(const SweepConfig& cfg, double value) {
  SweepPoint pt;
  pt.value = value;
  try {
    const NetworkModel model = with_parameter(cfg.base, cfg.parameter, value);
    require_valid(validate(model), "sweep model");
    double t_onset = 0.0;
    for (const auto& d : cfg.disturbances) t_onset = d.t_onset;
    if (cfg.engine == SweepEngine::Swing) {
      const auto series = run_swing(model, cfg.swing, cfg.disturbances);
      const double thr = cfg.threshold > 0.0 ? cfg.threshold : default_threshold(Quantity::Domega, model);
      const auto rep = detect_arrivals(series, Quantity::Domega, cfg.origin, model, thr, t_onset);
      pt.fitted_speed = rep.fitted_speed_kms;
      pt.theory_speed = theory_report(model).v_mech_kms;
    } else {
      const auto series = run_emt(model, cfg.emt, cfg.disturbances);
      const double thr = cfg.threshold > 0.0 ? cfg.threshold : default_threshold(Quantity::Voltage, model);
      const auto rep = detect_arrivals(series, Quantity::Voltage, cfg.origin, model, thr, t_onset);
      pt.fitted_speed = rep.fitted_speed_kms * 1e3;
      pt.theory_speed = theory_report(model).v_em_ms;
    }
    pt.ok = true;
    pt.status = "ok";
  } catch (const std::exception& e) {
    pt.ok = false;
    pt.status = e.what();
  }
  return pt;
}

}  // namespace

std::vector<SweepPoint> run_sensitivity_sweep(const SweepConfig& config) {
  if (config.values.empty()) throw Error(ErrorKind::Configuration, "sweep needs at least one value");
  for (double v : config.values) {
    if (!(v > 0.0)) throw Error(ErrorKind::Configuration, "sweep values must be > 0");
  }
  std::vector<SweepPoint> out(config.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.size(); i = next++) {
      out[i] = run_sweep_point(config, config.values[i]);
    }
  };
  const int n_threads = sweep_thread_count(config.threads, out.size());
  std::vector<std::jthread> pool;
  for (int k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  return out;
}

ReflectionReport detect_reflection(const TimeSeriesSet& series, int origin,
                                   const NetworkModel& model, double threshold, double t_onset) {
  if (!is_ring(model)) throw Error(ErrorKind::Topology, "detect_reflection needs a ring network");
  const auto rep = detect_arrivals(series, Quantity::Domega, origin, model, threshold, t_onset);
  const auto dist = path_distances(model, origin);
  const double dmax = *std::max_element(dist.begin(), dist.end());
  std::vector<int> far;
  for (int b = 0; b < model.bus_count(); ++b) {
    if (dist[b] >= dmax * (1.0 - 1e-9)) far.push_back(b);
  }

  ReflectionReport out;
  out.meeting_buses = far;
  auto arrival = [&](int bus) {
    const auto& a = rep.at(bus).arrival_t;
    if (!a) {
      throw Error(ErrorKind::InsufficientArrivals,
                  "no arrival detected at bus " + std::to_string(bus) + " near the meeting point");
    }
    return *a;
  };
  if (far.size() == 2) {
    out.path_bus_a = far[0];
    out.path_bus_b = far[1];
  } else {
    // Even ring: the fronts reach the farthest bus through its two neighbours.
    std::vector<int> nb;
    const auto inc = model.incidence();
    for (int li : inc[far.front()]) {
      const auto& line = model.lines[li];
      nb.push_back(line.from_bus == far.front() ? line.to_bus : line.from_bus);
    }
    out.path_bus_a = nb.at(0);
    out.path_bus_b = nb.at(1);
  }
  out.path_time_a = arrival(out.path_bus_a);
  out.path_time_b = arrival(out.path_bus_b);
  out.meeting_time = far.size() == 2 ? 0.5 * (out.path_time_a + out.path_time_b)
                                     : arrival(far.front());
  out.tolerance = series.sample_interval();
  out.paths_agree = std::abs(out.path_time_a - out.path_time_b) <= out.tolerance * (1.0 + 1e-9);
  return out;
}

std::vector<CycleResidual> fundamental_residual(const TimeSeriesSet& series, int bus,
                                                Quantity quantity, double f_nominal,
                                                double t_from) {
  const auto& t = series.times();
  auto x = series.values(bus, quantity);
  const double period = 1.0 / f_nominal;
  const double w = 2.0 * std::numbers::pi * f_nominal;
  std::vector<CycleResidual> out;
  std::size_t k = 0;
  while (k < t.size() && t[k] < t_from) ++k;
  while (k < t.size()) {
    std::size_t e = k;
    while (e < t.size() && t[e] < t[k] + period) ++e;
    if (e >= t.size() || e - k < 4) break;
    const auto m = static_cast<Eigen::Index>(e - k);
    Eigen::MatrixXd a(m, 3);
    Eigen::VectorXd y(m);
    for (std::size_t j = k; j < e; ++j) {
      const auto r = static_cast<Eigen::Index>(j - k);
      a(r, 0) = std::sin(w * t[j]);
      a(r, 1) = std::cos(w * t[j]);
      a(r, 2) = 1.0;
      y(r) = x[j];
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
    out.push_back({t[k], (a * c - y).cwiseAbs().maxCoeff()});
    k = e;
  }
  return out;
}

const char* to_string(EventClass c) {
  switch (c) {
    case EventClass::NoEvent: return "no_event";
    case EventClass::GenerationTrip: return "generation_trip";
    case EventClass::LoadShed: return "load_shed";
    case EventClass::LineTrip: return "line_trip";
  }
  return "?";
}

Classification classify_event(const TimeSeriesSet& series, double eps, double noise_floor) {
  std::vector<const Channel*> chans;
  for (const auto& ch : series.channels()) {
    if (ch.quantity == Quantity::Domega) chans.push_back(&ch);
  }
  if (chans.empty()) throw Error(ErrorKind::Configuration, "classify_event needs domega channels");
  const auto& t = series.times();
  const std::size_t n = t.size();
  Classification out;
  if (n < 2) return out;

  // Per-sample bus mean of the deviation from the first sample.
  std::vector<double> mean(n, 0.0), sq(n, 0.0);
  for (const Channel* ch : chans) {
    const double base = ch->values.front();
    for (std::size_t k = 0; k < n; ++k) {
      const double d = ch->values[k] - base;
      mean[k] += d;
      sq[k] += d * d;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    mean[k] /= chans.size();
    sq[k] /= chans.size();
  }
  const std::size_t late = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(n)));
  double acc = 0.0;
  for (std::size_t k = late; k < n; ++k) acc += mean[k];
  out.late_mean = acc / static_cast<double>(n - late);
  for (std::size_t k = 1; k < n; ++k) out.energy += 0.5 * (sq[k] + sq[k - 1]) * (t[k] - t[k - 1]);

  if (!(out.energy > noise_floor)) {
    out.kind = EventClass::NoEvent;
  } else if (out.late_mean < -eps) {
    out.kind = EventClass::GenerationTrip;
  } else if (out.late_mean > eps) {
    out.kind = EventClass::LoadShed;
  } else {
    out.kind = EventClass::LineTrip;
  }
  return out;
}

}  // namespace transwave
