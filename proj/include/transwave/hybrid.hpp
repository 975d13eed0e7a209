#pragma once

#include <vector>

#include "transwave/core_model.hpp"
#include "transwave/emt.hpp"
#include "transwave/time_series.hpp"

namespace transwave {

struct HybridConfig {
  double dt_em = 1e-6;        // s
  int rate_ratio = 1000;      // dt_mech = rate_ratio * dt_em
  double t_end = 6.0;         // s
  double damping_d = 0.5;     // swing damping, pu
  int record_every = 50;      // fine-grid decimation of the output
  EmtConfig emt;              // source impedance and pre-roll; dt/t_end are ignored

  double dt_mech() const { return rate_ratio * dt_em; }
  /// Throws Error(Configuration) on violated bounds.
  void validate(const NetworkModel& model) const;
};

/// Lockstep co-simulation: the EMT network runs at dt_em with generator EMF
/// phases taken from swing equations integrated every rate_ratio steps. Swing
/// electrical power is the sliding mean of e*i at each generator EMF over half
/// a fundamental cycle (the period of single-phase power ripple).
/// Output channels per bus: v (V), domega (pu), delta (rad), all on the fine grid.
TimeSeriesSet run_hybrid(const NetworkModel& model, const HybridConfig& config,
                         const std::vector<DisturbanceSpec>& disturbances);

}  // namespace transwave
