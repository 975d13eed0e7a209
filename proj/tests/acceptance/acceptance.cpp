// Acceptance checks for the wave lab. One PASS/FAIL line per criterion;
// the exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "transwave/emt.hpp"
#include "transwave/event_locator.hpp"
#include "transwave/hybrid.hpp"
#include "transwave/presets.hpp"
#include "transwave/swing.hpp"
#include "transwave/wave_analysis.hpp"

using namespace transwave;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within(double x, double target, double tol) { return std::abs(x - target) <= tol; }

// Shared runs, computed once.
const TimeSeriesSet& ring_fault_run() {
  static const TimeSeriesSet s = [] {
    SwingConfig cfg;
    cfg.t_end = 6.0;
    return run_swing(presets::ring23(), cfg, presets::scenario("ring23-fault"));
  }();
  return s;
}

const ArrivalReport& ring_fault_arrivals() {
  static const ArrivalReport r = detect_arrivals(ring_fault_run(), Quantity::Domega, 1, presets::ring23(), 1e-4);
  return r;
}

Outcome c1() {
  const double h = theory_report(presets::ring23()).h_s_per_km;
  return {within(h, 12.55, 0.01), fmt("h = %.4f s/km (12.55 +/- 0.01)", h)};
}

Outcome c2() {
  const double v = theory_report(presets::ring23()).v_mech_kms;
  return {within(v, 339.97, 0.5), fmt("v_mech = %.3f km/s (339.97 +/- 0.5)", v)};
}

Outcome c3() {
  auto m = presets::ring23();
  const double v1 = theory_report(m).v_em_ms;
  for (auto& l : m.lines) l.c_per_len = 0.8e-9;
  const double v2 = theory_report(m).v_em_ms;
  const bool ok = std::abs(v1 / 2.93e8 - 1.0) <= 0.01 && std::abs(v2 / 1.11e8 - 1.0) <= 0.01;
  return {ok, fmt("v_em = %.4g m/s (2.93e8 +/- 1%%), C=0.8 nF: %.4g m/s (1.11e8 +/- 1%%)", v1, v2)};
}

Outcome c4() {
  const auto& r = ring_fault_arrivals();
  const double v = r.fitted_speed_kms;
  return {std::abs(v / 339.97 - 1.0) <= 0.15,
          fmt("fitted %.2f km/s over %d buses, r2 %.4f (339.97 +/- 15%%)", v, r.detected(), r.fit_r2)};
}

SweepConfig swing_sweep(SweepParameter p, std::vector<double> values) {
  SweepConfig cfg;
  cfg.base = presets::ring23();
  cfg.disturbances = presets::scenario("ring23-fault");
  cfg.parameter = p;
  cfg.values = std::move(values);
  cfg.origin = 1;
  cfg.swing.t_end = 6.0;
  return cfg;
}

Outcome c5() {
  const auto pts = run_sensitivity_sweep(swing_sweep(SweepParameter::InertiaH, {10.0, 5.0}));
  if (!pts[0].ok || !pts[1].ok) return {false, "sweep point failed: " + pts[0].status + " / " + pts[1].status};
  const double ratio = pts[1].fitted_speed / pts[0].fitted_speed;
  return {ratio >= 1.30 && ratio <= 1.55,
          fmt("H=10: %.2f km/s, H=5: %.2f km/s, ratio %.3f in [1.30, 1.55]", pts[0].fitted_speed,
              pts[1].fitted_speed, ratio)};
}

Outcome c6() {
  const auto pts = run_sensitivity_sweep(swing_sweep(SweepParameter::LPerLen, {0.102e-6, 0.2e-6}));
  if (!pts[0].ok || !pts[1].ok) return {false, "sweep point failed: " + pts[0].status + " / " + pts[1].status};
  return {pts[1].fitted_speed < pts[0].fitted_speed,
          fmt("L=0.102 uH: %.2f km/s > L=0.2 uH: %.2f km/s", pts[0].fitted_speed, pts[1].fitted_speed)};
}

Outcome c7() {
  SweepConfig cfg;
  cfg.base = presets::ring23();
  cfg.disturbances = presets::scenario("ring23-emt-fault");
  cfg.parameter = SweepParameter::CPerLen;
  cfg.values = {0.115e-9, 0.8e-9};
  cfg.engine = SweepEngine::Emt;
  cfg.origin = 1;
  const auto pts = run_sensitivity_sweep(cfg);
  bool ok = true;
  std::string detail;
  for (const auto& p : pts) {
    // dt must resolve the shortest travel time with ten steps.
    const auto m = with_parameter(cfg.base, cfg.parameter, p.value);
    const double dt = cfg.emt.resolve_dt(m);
    const bool fine = dt <= min_travel_time(m) / 10.0;
    const bool close = p.ok && std::abs(p.fitted_speed / p.theory_speed - 1.0) <= 0.05;
    ok = ok && fine && close;
    detail += fmt("C=%.3g: %.4g vs 1/sqrt(LC) %.4g m/s; ", p.value, p.fitted_speed, p.theory_speed);
  }
  return {ok, detail + "(within 5%)"};
}

Outcome c8() {
  const double zc = 100.0, tau = 1e-6, dt = 1e-7;
  enum End { Open, Matched, Short };
  auto run = [&](End end, std::vector<double>& v_far, std::vector<double>& i_send) {
    emt::Circuit c(2, dt);
    emt::SourceWave step;
    step.custom = [](double t) { return t > 0.0 ? 1.0 : 0.0; };
    c.add_source(0, step, 0.0, 0.0);
    const int line = c.add_line(0, 1, zc, tau);
    c.add_resistor(1, emt::kGround, end == Open ? 1e12 : end == Matched ? zc : 1e-6);
    for (int k = 0; k < 60; ++k) {
      c.step();
      v_far.push_back(c.voltage(1));
      i_send.push_back(c.line_current(line, 0));
    }
  };
  std::vector<double> v_open, i_open, v_match, i_match, v_short, i_short;
  run(Open, v_open, i_open);
  run(Matched, v_match, i_match);
  run(Short, v_short, i_short);

  // Open end: 0 before tau - dt, 2 V from tau + dt until the source reflection returns.
  const int n_tau = 10;
  bool open_ok = true;
  for (int k = 0; k < 25; ++k) {
    const int step = k + 1;
    if (step <= n_tau - 1) open_ok = open_ok && std::abs(v_open[k]) < 1e-9;
    if (step >= n_tau + 1) open_ok = open_ok && std::abs(v_open[k] - 2.0) < 1e-9;
  }
  double reflect = 0.0;
  for (double i : i_match) reflect = std::max(reflect, std::abs(i * zc - 1.0));
  double far_short = 0.0;
  for (double v : v_short) far_short = std::max(far_short, std::abs(v));
  const bool ok = open_ok && reflect < 1e-9 && far_short < 1e-6;
  return {ok, fmt("open end 0->2 V at tau: %s; matched reflection %.2e; shorted far end max %.2e V",
                  open_ok ? "yes" : "no", reflect, far_short)};
}

Outcome c9() {
  const auto m = presets::ring23();
  const auto refl = detect_reflection(ring_fault_run(), 1, m);
  // Mirror pairs about the faulted bus 1.
  double worst = 0.0;
  for (int k = 1; k <= 11; ++k) {
    const auto a = ring_fault_run().values((1 + k) % 23, Quantity::Domega);
    const auto b = ring_fault_run().values((1 - k + 23) % 23, Quantity::Domega);
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return {refl.paths_agree && worst < 1e-9,
          fmt("buses %d/%d reached at %.4f / %.4f s (tol %.0e s); mirror mismatch %.2e", refl.path_bus_a,
              refl.path_bus_b, refl.path_time_a, refl.path_time_b, refl.tolerance, worst)};
}

Outcome c10() {
  SwingConfig cfg;
  cfg.t_end = 10.0;
  cfg.record_every = 10;
  bool ok = true;
  std::string detail;
  for (const auto& [name, expected] : {std::pair{"ring23-gen-trip", EventClass::GenerationTrip},
                                       std::pair{"ring23-load-shed", EventClass::LoadShed},
                                       std::pair{"ring23-line-trip", EventClass::LineTrip}}) {
    const auto s = run_swing(presets::scenario_network(name), cfg, presets::scenario(name));
    const auto c = classify_event(s);
    ok = ok && c.kind == expected;
    detail += std::string(name) + " -> " + to_string(c.kind) + "; ";
  }
  return {ok, detail};
}

Outcome c11() {
  const std::vector<Point2> sensors = {{0, 0}, {400, 0}, {0, 400}, {400, 400}, {200, 200}};
  const Point2 ev{130, 270};
  const auto est = estimate_speed_and_locate(synthetic_arrivals(sensors, ev, 1.0, 350.0));
  const double err = distance(est.position, ev);
  const double verr = std::abs(est.speed_used / 350.0 - 1.0);
  return {err < 1e-3 && verr < 1e-3, fmt("position error %.2e km, speed %.6f km/s", err, est.speed_used)};
}

Outcome c12() {
  const auto m = presets::scenario_network("mesh7-gen-trip");
  const auto ds = presets::scenario("mesh7-gen-trip");
  SwingConfig cfg;
  cfg.t_end = 4.0;
  const auto s = run_swing(m, cfg, ds);
  const int origin = ds[0].target;
  const auto rep = detect_arrivals(s, Quantity::Domega, origin, m, 1e-5, ds[0].t_onset);
  std::vector<SensorArrival> sensors;
  for (int b : {0, 6, 42, 48, 24}) {
    if (rep.at(b).arrival_t) sensors.push_back({"bus" + std::to_string(b), m.buses[b].coord, *rep.at(b).arrival_t, 1.0});
  }
  const auto est = estimate_speed_and_locate(sensors);
  const double err = distance(est.position, m.buses[origin].coord);
  return {err < 100.0, fmt("trip at bus %d located at (%.1f, %.1f) km, error %.2f km, fitted v %.1f km/s", origin,
                           est.position.x, est.position.y, err, est.speed_used)};
}

Outcome c13() {
  const auto m = presets::ring23();
  const auto ds = presets::scenario("ring23-emt-fault");
  HybridConfig cfg;
  cfg.dt_em = 10e-6;
  cfg.rate_ratio = 100;
  cfg.t_end = 6.0;
  cfg.record_every = 5;
  const auto s = run_hybrid(m, cfg, ds);
  const double onset = ds[0].t_onset;
  const auto em = detect_arrivals(s, Quantity::Voltage, 1, m, default_threshold(Quantity::Voltage, m), onset);
  const auto mech = detect_arrivals(s, Quantity::Domega, 1, m, 1e-4, onset);

  bool order = true, decay = true, persist = true;
  double worst_ratio = 0.0, weakest_late = 1.0;
  for (int b = 0; b < m.bus_count(); ++b) {
    const auto& te = em.at(b).arrival_t;
    const auto& tm = mech.at(b).arrival_t;
    order = order && te && tm && *te < *tm;

    const auto res = fundamental_residual(s, b, Quantity::Voltage, m.bases.f_nominal, onset);
    double peak = 0.0, late = 0.0;
    for (const auto& r : res) {
      peak = std::max(peak, r.max_abs);
      if (r.t_start >= onset + 0.5) late = std::max(late, r.max_abs);
    }
    const double ratio = peak > 0.0 ? late / peak : 1.0;
    worst_ratio = std::max(worst_ratio, ratio);
    decay = decay && ratio < 0.1;

    double after5 = 0.0;
    const auto w = s.values(b, Quantity::Domega);
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (s.times()[k] > 5.0) after5 = std::max(after5, std::abs(w[k]));
    }
    weakest_late = std::min(weakest_late, after5);
    persist = persist && after5 > 1e-4;
  }
  return {order && decay && persist,
          fmt("EM before mech at every bus: %s; worst late/peak EM residual %.4f (< 0.1); "
              "smallest |domega| after 5 s %.2e pu (> 1e-4)",
              order ? "yes" : "no", worst_ratio, weakest_late)};
}

Outcome c14() {
  // Equilibrium.
  SwingConfig cfg;
  cfg.t_end = 10.0;
  const auto flat = run_swing(presets::ring23(), cfg, {});
  double drift = 0.0;
  for (const auto& ch : flat.channels()) {
    if (ch.quantity != Quantity::Domega) continue;
    for (double v : ch.values) drift = std::max(drift, std::abs(v));
  }

  // RK4 on the two-bus oscillator.
  NetworkModel two;
  two.bases = presets::default_bases();
  auto bus = presets::default_bus();
  two.buses = {bus, bus};
  two.buses[1].id = 1;
  two.buses[1].coord = {100.0, 0.0};
  auto line = presets::default_line();
  line.from_bus = 0;
  line.to_bus = 1;
  two.lines = {line};
  SwingSystem sys(two, {}, 0.0);
  auto angle_after = [&](double dt) {
    auto st = sys.initial_state();
    st.delta[0] += 0.3;
    const long n = std::lround(2.0 / dt);
    for (long k = 0; k < n; ++k) sys.step(st, dt);
    return st.delta[0] - st.delta[1];
  };
  const double ref = angle_after(1.25e-4);
  const double factor = std::abs(angle_after(0.02) - ref) / std::abs(angle_after(0.01) - ref);

  // Locator equivariance.
  std::vector<SensorArrival> arr =
      synthetic_arrivals({{0, 0}, {400, 0}, {0, 400}, {400, 400}, {200, 200}}, {130, 270}, 1.0, 350.0);
  arr[1].arrival_t += 0.02;
  arr[3].arrival_t -= 0.01;
  const auto base = locate(arr, 350.0);
  auto moved = arr;
  for (auto& a : moved) {
    a.position.x += 500.0;
    a.position.y -= 250.0;
    a.arrival_t += 3.0;
  }
  const auto est = locate(moved, 350.0);
  const double shift_err = std::hypot(est.position.x - 500.0 - base.position.x, est.position.y + 250.0 - base.position.y);
  const double t_err = std::abs(est.origin_t - 3.0 - base.origin_t);

  const bool ok = drift < 1e-8 && factor >= 12.0 && factor <= 20.0 && shift_err < 1e-6 && t_err < 1e-9;
  return {ok, fmt("equilibrium max|dw| %.1e; RK4 factor %.2f; locator shift error %.1e km, %.1e s", drift, factor,
                  shift_err, t_err)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"theory inertia density", c1},   {"theory mech speed", c2},        {"theory EM speed", c3},
      {"simulated mech speed", c4},     {"inertia sensitivity", c5},      {"inductance sensitivity", c6},
      {"EM speed recovery", c7},        {"Bergeron oracles", c8},         {"reflective wave", c9},
      {"event signatures", c10},        {"location, exact", c11},         {"location, simulated mesh", c12},
      {"hybrid two-timescale", c13},    {"property suites", c14},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2zu %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
