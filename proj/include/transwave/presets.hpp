#pragma once

#include <string>
#include <vector>

#include "transwave/core_model.hpp"

namespace transwave::presets {

/// 100 MVA / 500 kV / 60 Hz.
SystemBases default_bases();

/// One generator group and one load per bus: H = 10 s, 100 coherent 120 MW
/// machines, 1000 MW load, 1 pu EMF.
Bus default_bus();

/// 0.325 ohm/km series impedance, L = 0.102 uH/m, C = 0.115 nF/m.
Line default_line();

/// 23 buses, 100 km lines.
NetworkModel ring23();

/// rows x cols mesh of default buses at `spacing_km`.
NetworkModel mesh(int rows = 7, int cols = 7, double spacing_km = 100.0);

/// Named disturbance sets for the reference experiments.
/// ring23-fault, ring23-emt-fault, ring23-gen-trip, ring23-load-shed,
/// ring23-line-trip, mesh7-gen-trip.
std::vector<DisturbanceSpec> scenario(const std::string& name);
std::vector<std::string> scenario_names();

/// Network that goes with a named scenario (the line-trip case redistributes
/// load around the ring so the tripped line carries flow).
NetworkModel scenario_network(const std::string& name);

}  // namespace transwave::presets
