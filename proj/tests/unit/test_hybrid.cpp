#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "transwave/error.hpp"
#include "transwave/hybrid.hpp"
#include "transwave/presets.hpp"
#include "transwave/swing.hpp"

using namespace transwave;
using Catch::Approx;

namespace {

HybridConfig coarse_config(double t_end) {
  HybridConfig cfg;
  cfg.dt_em = 10e-6;
  cfg.rate_ratio = 100;
  cfg.t_end = t_end;
  cfg.record_every = 10;
  return cfg;
}

// Ring whose EMT line reactance equals the swing model's r_per_len reactance,
// fed by stiff sources, so both engines describe the same electromechanics.
NetworkModel consistent_ring() {
  auto m = presets::ring23();
  const double omega = m.bases.omega_s();
  for (auto& l : m.lines) l.l_per_len = l.r_per_len / omega / 1000.0;
  return m;
}

}  // namespace

TEST_CASE("hybrid output sits on a uniform fine grid") {
  auto cfg = coarse_config(0.2);
  const auto s = run_hybrid(presets::ring23(), cfg, {});
  const double step = cfg.dt_em * cfg.record_every;
  REQUIRE(s.sample_count() == 2001);
  for (std::size_t k = 0; k < s.sample_count(); ++k) {
    CHECK(s.times()[k] == Approx(k * step).margin(1e-12));
  }
  CHECK(s.channels().size() == 69);
  CHECK(s.has_quantity(Quantity::Voltage));
  CHECK(s.has_quantity(Quantity::Delta));
}

TEST_CASE("undisturbed hybrid run stays flat") {
  const auto s = run_hybrid(presets::ring23(), coarse_config(2.0), {});
  double worst = 0.0;
  for (int bus = 0; bus < 23; ++bus) {
    for (double w : s.values(bus, Quantity::Domega)) worst = std::max(worst, std::abs(w));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("hybrid follows the swing model on a phasor-consistent ring") {
  const auto m = consistent_ring();
  const auto ds = presets::scenario("ring23-gen-trip");
  auto cfg = coarse_config(3.0);
  cfg.emt.source_xd_pu = 0.01;
  const auto hyb = run_hybrid(m, cfg, ds);
  SwingConfig sw;
  sw.t_end = cfg.t_end;
  const auto ref = run_swing(m, sw, ds);

  const double hyb_step = cfg.dt_em * cfg.record_every;
  double se = 0.0;
  double ss = 0.0;
  for (int bus = 0; bus < m.bus_count(); ++bus) {
    const auto a = hyb.values(bus, Quantity::Domega);
    const auto b = ref.values(bus, Quantity::Domega);
    for (std::size_t k = 0; k < b.size(); ++k) {
      const auto j = static_cast<std::size_t>(std::lround(ref.times()[k] / hyb_step));
      if (j >= a.size()) break;
      se += (a[j] - b[k]) * (a[j] - b[k]);
      ss += b[k] * b[k];
    }
  }
  REQUIRE(ss > 0.0);
  CHECK(std::sqrt(se / ss) < 0.05);
}

TEST_CASE("hybrid config validation") {
  const auto m = presets::ring23();
  auto cfg = coarse_config(1.0);
  cfg.dt_em = 1e-3;  // longer than a line travel time
  CHECK_THROWS_AS(cfg.validate(m), Error);
  cfg = coarse_config(1.0);
  cfg.rate_ratio = 0;
  CHECK_THROWS_AS(cfg.validate(m), Error);
  cfg = coarse_config(1.0);
  cfg.rate_ratio = 10000;  // 0.1 s mechanical step
  CHECK_THROWS_AS(cfg.validate(m), Error);
  CHECK_NOTHROW(coarse_config(1.0).validate(m));

  auto no_gen = m;
  no_gen.buses[3].gen_rating.reset();
  no_gen.buses[3].inertia_h.reset();
  try {
    run_hybrid(no_gen, coarse_config(0.1), {});
    FAIL("expected configuration error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Configuration);
  }
}
