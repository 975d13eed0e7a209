#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numbers>

#include "transwave/core_model.hpp"
#include "transwave/error.hpp"
#include "transwave/presets.hpp"

using namespace transwave;
using Catch::Approx;

namespace {

bool has_code(const ValidationReport& r, const std::string& code) {
  return std::any_of(r.begin(), r.end(), [&](const Violation& v) { return v.code == code; });
}

std::vector<int> neighbours(const NetworkModel& m, int bus) {
  std::vector<int> out;
  const auto inc = m.incidence();
  for (int li : inc[bus]) {
    const auto& l = m.lines[li];
    out.push_back(l.from_bus == bus ? l.to_bus : l.from_bus);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("system bases derive z_base and omega") {
  SystemBases b{100.0, 500.0, 60.0};
  CHECK(b.z_base() == 2500.0);
  CHECK(b.omega_s() == Approx(2.0 * std::numbers::pi * 60.0));
}

TEST_CASE("ring-23 preset") {
  const auto m = presets::ring23();
  REQUIRE(m.bus_count() == 23);
  REQUIRE(m.line_count() == 23);
  double total = 0.0;
  for (const auto& l : m.lines) total += l.length;
  CHECK(total == Approx(2300.0));
  CHECK(neighbours(m, 0) == std::vector<int>{1, 22});
  CHECK(validate(m).empty());
  // Adjacent buses sit one line length apart on the circle.
  CHECK(distance(m.buses[0].coord, m.buses[1].coord) == Approx(100.0));
  CHECK(*m.buses[5].gen_rating == 120.0);
  CHECK(*m.buses[5].inertia_h == 10.0);
  CHECK(m.buses[5].coherent_count == 100);
  CHECK(m.buses[5].aggregate_inertia(m.bases) == Approx(1200.0));
}

TEST_CASE("build_ring: smallest ring and every size has degree 2") {
  const auto m3 = build_ring(3, 1.0, presets::default_bus(), presets::default_line());
  CHECK(m3.line_count() == 3);
  for (int d : m3.degrees()) CHECK(d == 2);
  for (int n = 3; n <= 40; ++n) {
    const auto m = build_ring(n, 50.0, presets::default_bus(), presets::default_line());
    CHECK(m.line_count() == n);
    for (int d : m.degrees()) CHECK(d == 2);
    CHECK(is_ring(m));
  }
}

TEST_CASE("build_ring rejects fewer than 3 buses") {
  try {
    build_ring(2, 100.0, presets::default_bus(), presets::default_line());
    FAIL("expected a topology error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Topology);
  }
}

TEST_CASE("build_mesh counts and degrees") {
  const auto m = presets::mesh(7, 7, 100.0);
  CHECK(m.bus_count() == 49);
  CHECK(m.line_count() == 84);
  const auto deg = m.degrees();
  CHECK(deg[0] == 2);
  CHECK(deg[48] == 2);
  CHECK(deg[3 * 7 + 3] == 4);
  CHECK(m.buses[2 * 7 + 4].coord == Point2{400.0, 200.0});
  CHECK_FALSE(is_ring(m));

  const auto m2 = presets::mesh(2, 2, 10.0);
  CHECK(m2.bus_count() == 4);
  CHECK(m2.line_count() == 4);
  for (int r = 2; r <= 6; ++r) {
    for (int c = 2; c <= 6; ++c) {
      CHECK(presets::mesh(r, c, 1.0).line_count() == r * (c - 1) + c * (r - 1));
    }
  }
  CHECK_THROWS_AS(presets::mesh(1, 5, 100.0), Error);
}

TEST_CASE("validate reports duplicate ids and disconnection") {
  auto m = presets::ring23();
  m.buses[7].id = 3;
  const auto r = validate(m);
  REQUIRE(has_code(r, "bus.duplicate_id"));
  const auto dup = std::count_if(r.begin(), r.end(), [](const Violation& v) { return v.code == "bus.duplicate_id"; });
  CHECK(dup == 1);
  const auto it = std::find_if(r.begin(), r.end(), [](const Violation& v) { return v.code == "bus.duplicate_id"; });
  CHECK(it->message.find('3') != std::string::npos);

  auto open = presets::ring23();
  open.lines.erase(open.lines.begin());  // still connected (a path)
  CHECK(validate(open).empty());
  open.lines.erase(open.lines.begin() + 5);
  CHECK(has_code(validate(open), "network.disconnected"));
}

TEST_CASE("validate flags bad bus and line fields") {
  auto m = presets::ring23();
  m.buses[1].inertia_h.reset();
  m.buses[2].coherent_count = 0;
  m.buses[3].emf_pu = 0.0;
  m.lines[4].l_per_len = 0.0;
  m.lines[5].to_bus = m.lines[5].from_bus;
  m.lines[6].to_bus = 99;
  const auto r = validate(m);
  CHECK(has_code(r, "bus.generator_fields"));
  CHECK(has_code(r, "bus.coherent_count"));
  CHECK(has_code(r, "bus.emf_pu"));
  CHECK(has_code(r, "line.lc"));
  CHECK(has_code(r, "line.self_loop"));
  CHECK(has_code(r, "line.endpoint"));
}

TEST_CASE("validate is idempotent") {
  auto m = presets::ring23();
  m.buses[4].load_p = -1.0;
  const auto a = validate(m);
  const auto b = validate(m);
  CHECK(a == b);
  CHECK_FALSE(a.empty());
}

TEST_CASE("disturbance validation") {
  const auto m = presets::ring23();
  DisturbanceSpec d;
  d.kind = DisturbanceKind::GenerationTrip;
  d.target = 5;
  d.magnitude = 120.0;
  CHECK(validate(m, d).empty());
  d.magnitude = 121.0;
  CHECK(has_code(validate(m, d), "disturbance.magnitude"));
  d.kind = DisturbanceKind::LoadShed;
  d.magnitude = 1001.0;
  CHECK(has_code(validate(m, d), "disturbance.magnitude"));
  d.kind = DisturbanceKind::Fault;
  d.magnitude = 1.0;
  d.duration = 0.0;
  CHECK(has_code(validate(m, d), "disturbance.duration"));
  d.duration = 0.1;
  d.t_onset = -1.0;
  CHECK(has_code(validate(m, d), "disturbance.t_onset"));
  d.t_onset = 0.0;
  d.kind = DisturbanceKind::LineTrip;
  d.target = 23;
  CHECK(has_code(validate(m, d), "disturbance.target"));
}

TEST_CASE("disturbance activity window") {
  DisturbanceSpec f;
  f.kind = DisturbanceKind::Fault;
  f.t_onset = 1.0;
  f.duration = 0.1;
  CHECK_FALSE(f.active_at(0.99));
  CHECK(f.active_at(1.05));
  CHECK_FALSE(f.active_at(1.11));
  DisturbanceSpec trip;
  trip.kind = DisturbanceKind::GenerationTrip;
  trip.t_onset = 1.0;
  CHECK(trip.active_at(100.0));
}

TEST_CASE("disturbance kind strings round-trip") {
  for (auto k : {DisturbanceKind::GenerationTrip, DisturbanceKind::LoadShed, DisturbanceKind::LineTrip,
                 DisturbanceKind::Fault}) {
    CHECK(parse_disturbance_kind(to_string(k)) == k);
  }
  CHECK_FALSE(parse_disturbance_kind("brownout").has_value());
}

TEST_CASE("path distances on ring and mesh") {
  const auto ring = presets::ring23();
  const auto d = path_distances(ring, 0);
  CHECK(d[11] == Approx(1100.0));
  CHECK(d[12] == Approx(1100.0));
  CHECK(d[1] == Approx(100.0));
  CHECK(d[22] == Approx(100.0));
  std::vector<bool> in_service(ring.line_count(), true);
  in_service[0] = false;  // 0-1 open
  CHECK(path_distances(ring, 0, in_service)[1] == Approx(2200.0));

  const auto mesh = presets::mesh(7, 7, 100.0);
  CHECK(path_distances(mesh, 0)[48] == Approx(1200.0));
}

TEST_CASE("scenario presets are valid") {
  for (const auto& name : presets::scenario_names()) {
    const auto m = presets::scenario_network(name);
    CHECK(validate(m).empty());
    CHECK(validate(m, presets::scenario(name)).empty());
  }
  CHECK_THROWS_AS(presets::scenario("nope"), Error);
}
