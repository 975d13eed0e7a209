#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "transwave/error.hpp"
#include "transwave/presets.hpp"
#include "transwave/swing.hpp"

using namespace transwave;
using Catch::Approx;

namespace {

NetworkModel two_bus(double line_km) {
  NetworkModel m;
  m.bases = presets::default_bases();
  auto b = presets::default_bus();
  b.id = 0;
  m.buses.push_back(b);
  b.id = 1;
  b.coord = {line_km, 0.0};
  m.buses.push_back(b);
  auto l = presets::default_line();
  l.from_bus = 0;
  l.to_bus = 1;
  l.length = line_km;
  m.lines.push_back(l);
  return m;
}

DisturbanceSpec gen_trip(int bus, double t, double mw) {
  DisturbanceSpec d;
  d.kind = DisturbanceKind::GenerationTrip;
  d.target = bus;
  d.t_onset = t;
  d.magnitude = mw;
  return d;
}

// Integrates the two-bus system from a small angle offset without damping and
// returns delta_0 - delta_1 sampled at the given times.
std::vector<double> two_bus_offsets(double dt, double t_end, double offset) {
  const auto m = two_bus(100.0);
  SwingSystem sys(m, {}, 0.0);
  auto s = sys.initial_state();
  s.delta[0] += offset;
  std::vector<double> out;
  const long steps = std::lround(t_end / dt);
  for (long k = 0; k < steps; ++k) sys.step(s, dt);
  out.push_back(s.delta[0] - s.delta[1]);
  out.push_back(s.domega[0] - s.domega[1]);
  return out;
}

double max_abs_domega(const TimeSeriesSet& s) {
  double worst = 0.0;
  for (const auto& c : s.channels()) {
    if (c.quantity != Quantity::Domega) continue;
    for (double v : c.values) worst = std::max(worst, std::abs(v));
  }
  return worst;
}

}  // namespace

TEST_CASE("undisturbed ring stays at equilibrium") {
  SwingConfig cfg;
  cfg.t_end = 10.0;
  cfg.record_every = 10;
  const auto s = run_swing(presets::ring23(), cfg, {});
  CHECK(max_abs_domega(s) < 1e-8);
  CHECK(s.sample_count() == 1001);
  CHECK(s.channels().size() == 46);
}

TEST_CASE("unequal dispatch starts from a power-flow solution") {
  auto m = presets::ring23();
  m.buses[4].load_p = 1600.0;
  m.buses[15].load_p = 400.0;
  SwingSystem sys(m, {}, 0.5);
  const auto s0 = sys.initial_state();
  CHECK(s0.delta[0] == 0.0);
  CHECK(std::abs(s0.delta[4]) > 1e-3);
  SwingConfig cfg;
  cfg.t_end = 5.0;
  CHECK(max_abs_domega(run_swing(m, cfg, {})) < 1e-8);
}

TEST_CASE("two-bus small-signal oscillation period") {
  // Linearized: d^2(d0 - d1)/dt^2 = -(omega_s / (H_agg X)) (d0 - d1) for equal machines.
  const auto m = two_bus(100.0);
  const double h_agg = 10.0 * 100.0 * 120.0 / 100.0;
  const double x = 0.325 * 100.0 / 2500.0;
  const double omega_n = std::sqrt(m.bases.omega_s() / (h_agg * x));
  const double period = 2.0 * std::numbers::pi / omega_n;

  SwingSystem sys(m, {}, 0.0);
  auto s = sys.initial_state();
  s.delta[0] += 1e-3;
  std::vector<double> crossings;
  double prev = s.delta[0] - s.delta[1];
  const double dt = 1e-3;
  for (int k = 1; k <= 6000; ++k) {
    sys.step(s, dt);
    const double cur = s.delta[0] - s.delta[1];
    if ((prev > 0.0) != (cur > 0.0)) {
      crossings.push_back((k - 1) * dt + dt * prev / (prev - cur));
    }
    prev = cur;
  }
  REQUIRE(crossings.size() >= 4);
  const double measured = 2.0 * (crossings.back() - crossings.front()) / (crossings.size() - 1);
  CHECK(measured == Approx(period).epsilon(0.02));
}

TEST_CASE("RK4 converges at fourth order") {
  const double t_end = 2.0;
  const auto ref = two_bus_offsets(1e-3 / 8.0, t_end, 0.3);
  const auto coarse = two_bus_offsets(0.02, t_end, 0.3);
  const auto fine = two_bus_offsets(0.01, t_end, 0.3);
  const double e_coarse = std::abs(coarse[0] - ref[0]);
  const double e_fine = std::abs(fine[0] - ref[0]);
  REQUIRE(e_fine > 0.0);
  const double ratio = e_coarse / e_fine;
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("fault response is symmetric about the faulted bus") {
  SwingConfig cfg;
  cfg.t_end = 3.0;
  const auto m = presets::ring23();
  const auto s = run_swing(m, cfg, presets::scenario("ring23-fault"));
  const int n = m.bus_count();
  double worst = 0.0;
  for (int k = 1; k <= n / 2; ++k) {
    const auto a = s.values((1 + k) % n, Quantity::Domega);
    const auto b = s.values((1 - k + n) % n, Quantity::Domega);
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  CHECK(worst < 1e-9);
  CHECK(max_abs_domega(s) > 1e-4);
}

TEST_CASE("total momentum tracks the net injection") {
  // Lossless network without damping: sum 2 H_i domega_i = integral of (P_m - P_load).
  const auto m = presets::ring23();
  SwingConfig cfg;
  cfg.t_end = 2.0;
  cfg.damping_d = 0.0;
  const auto trip = gen_trip(7, 0.1, 60.0);
  const auto s = run_swing(m, cfg, {trip});
  double momentum = 0.0;
  for (int i = 0; i < m.bus_count(); ++i) {
    momentum += 2.0 * m.buses[i].aggregate_inertia(m.bases) * s.values(i, Quantity::Domega).back();
  }
  const double expected = -0.6 * (2.0 - 0.1);
  CHECK(momentum == Approx(expected).epsilon(1e-6));

  SwingSystem sys(m, {trip}, 0.0);
  CHECK(sys.net_injection(0.05) == Approx(0.0).margin(1e-12));
  CHECK(sys.net_injection(0.2) == Approx(-0.6));
}

TEST_CASE("electrical power matches a per-line oracle") {
  const auto m = presets::mesh(5, 5, 80.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> delta(m.bus_count()), volt(m.bus_count());
  for (auto& d : delta) d = u(rng);
  for (auto& v : volt) v = 1.0 + 0.1 * u(rng);
  const auto p = electrical_power(m, delta, volt);

  std::vector<double> oracle(m.bus_count(), 0.0);
  for (const auto& l : m.lines) {
    const double x = l.r_per_len * l.length / (500.0 * 500.0 / 100.0);
    const double f = volt[l.from_bus] * volt[l.to_bus] / x * std::sin(delta[l.from_bus] - delta[l.to_bus]);
    oracle[l.from_bus] += f;
    oracle[l.to_bus] -= f;
  }
  double sum = 0.0;
  for (int i = 0; i < m.bus_count(); ++i) {
    CHECK(p[i] == Approx(oracle[i]).margin(1e-12 * std::max(1.0, std::abs(oracle[i]))));
    sum += p[i];
  }
  CHECK(std::abs(sum) < 1e-9);

  std::vector<bool> in_service(m.line_count(), true);
  in_service[0] = false;
  const auto p_open = electrical_power(m, delta, volt, in_service);
  CHECK(p_open[m.lines[0].from_bus] != Approx(p[m.lines[0].from_bus]));

  auto bad = m;
  bad.lines[3].r_per_len = 0.0;
  try {
    electrical_power(bad, delta);
    FAIL("expected singular line");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularLine);
  }
}

TEST_CASE("disturbance sign signatures") {
  SwingConfig cfg;
  cfg.t_end = 4.0;
  const auto m = presets::ring23();
  const auto trip = run_swing(m, cfg, presets::scenario("ring23-gen-trip"));
  const auto shed = run_swing(m, cfg, presets::scenario("ring23-load-shed"));
  for (int i = 0; i < m.bus_count(); ++i) {
    CHECK(trip.values(i, Quantity::Domega).back() < 0.0);
    CHECK(shed.values(i, Quantity::Domega).back() > 0.0);
  }
}

TEST_CASE("swing config validation") {
  SwingConfig cfg;
  cfg.dt = 0.02;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.dt = 1e-3;
  cfg.record_every = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);

  auto m = presets::ring23();
  m.buses[2].gen_rating.reset();
  m.buses[2].inertia_h.reset();
  try {
    run_swing(m, SwingConfig{}, {});
    FAIL("expected configuration error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Configuration);
  }
}

TEST_CASE("swing_step matches the system stepper") {
  const auto m = presets::ring23();
  const auto ds = presets::scenario("ring23-fault");
  SwingConfig cfg;
  SwingSystem sys(m, ds, cfg.damping_d);
  auto a = sys.initial_state();
  auto b = a;
  for (int k = 0; k < 50; ++k) {
    sys.step(a, cfg.dt);
    b = swing_step(m, b, cfg, ds);
  }
  CHECK(a.domega == b.domega);
  CHECK(a.delta == b.delta);
}
