#include "transwave/presets.hpp"

#include "transwave/error.hpp"

namespace transwave::presets {

SystemBases default_bases() { return SystemBases{100.0, 500.0, 60.0}; }

Bus default_bus() {
  Bus bus;
  bus.gen_rating = 120.0;
  bus.inertia_h = 10.0;
  bus.coherent_count = 100;
  bus.load_p = 1000.0;
  bus.emf_pu = 1.0;
  return bus;
}

Line default_line() {
  Line line;
  line.length = 100.0;
  line.r_per_len = 0.325;
  line.l_per_len = 0.102e-6;
  line.c_per_len = 0.115e-9;
  line.len_unit_em = LengthUnit::Meter;
  return line;
}

NetworkModel ring23() { return build_ring(23, 100.0, default_bus(), default_line(), default_bases()); }

NetworkModel mesh(int rows, int cols, double spacing_km) {
  return build_mesh(rows, cols, spacing_km, default_bus(), default_line(), default_bases());
}

namespace {

DisturbanceSpec fault(int bus, double t_onset, double duration) {
  DisturbanceSpec d;
  d.kind = DisturbanceKind::Fault;
  d.target = bus;
  d.t_onset = t_onset;
  d.magnitude = DisturbanceSpec::kDefaultFaultResistance;
  d.duration = duration;
  return d;
}

DisturbanceSpec event(DisturbanceKind kind, int target, double t_onset, double magnitude) {
  DisturbanceSpec d;
  d.kind = kind;
  d.target = target;
  d.t_onset = t_onset;
  d.magnitude = magnitude;
  return d;
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"ring23-fault",     "ring23-emt-fault", "ring23-gen-trip",
          "ring23-load-shed", "ring23-line-trip", "mesh7-gen-trip"};
}

std::vector<DisturbanceSpec> scenario(const std::string& name) {
  if (name == "ring23-fault") return {fault(1, 0.0, 0.2)};
  // One clean cycle recorded before the onset, which falls on a voltage peak.
  if (name == "ring23-emt-fault") return {fault(1, 1.25 / 60.0, 0.1)};
  if (name == "ring23-gen-trip") return {event(DisturbanceKind::GenerationTrip, 5, 1.0, 120.0)};
  if (name == "ring23-load-shed") return {event(DisturbanceKind::LoadShed, 5, 1.0, 120.0)};
  if (name == "ring23-line-trip") return {event(DisturbanceKind::LineTrip, 0, 1.0, 0.0)};
  if (name == "mesh7-gen-trip") return {event(DisturbanceKind::GenerationTrip, 2 * 7 + 4, 1.0, 120.0)};
  throw Error(ErrorKind::Configuration, "unknown scenario preset '" + name + "'");
}

NetworkModel scenario_network(const std::string& name) {
  if (name == "mesh7-gen-trip") return mesh(7, 7, 100.0);
  auto model = ring23();
  if (name == "ring23-line-trip") {
    // Heavy load next to the tripped line, light load opposite: line 0 carries flow.
    model.buses[0].load_p = 1400.0;
    model.buses[1].load_p = 1400.0;
    model.buses[11].load_p = 600.0;
    model.buses[12].load_p = 600.0;
  }
  scenario(name);  // rejects unknown names
  return model;
}

}  // namespace transwave::presets
