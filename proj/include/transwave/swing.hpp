#pragma once

#include <span>
#include <vector>

#include "transwave/core_model.hpp"
#include "transwave/time_series.hpp"

namespace transwave {

struct SwingState {
  double t = 0.0;
  std::vector<double> delta;   // rad
  std::vector<double> domega;  // pu of f_nominal
};

struct SwingConfig {
  double dt = 1e-3;
  double t_end = 10.0;
  double damping_d = 0.5;  // pu power per pu speed deviation
  int record_every = 1;

  /// Throws Error(Configuration) on any violated bound.
  void validate() const;
};

/// Per-unit series reactance of a line as seen by the sine power-flow law:
/// r_per_len * length / z_base, treated as a pure reactance.
double line_reactance_pu(const Line& line, const SystemBases& bases);

/// Net active power leaving each bus over its lines:
/// P_i = sum_j (V_i V_j / X_ij) sin(delta_i - delta_j).
/// `voltage` holds per-bus magnitudes (pu); empty means every bus at its emf_pu.
/// Lines with line_in_service[k] == false are skipped (empty = all in service).
std::vector<double> electrical_power(const NetworkModel& model, std::span<const double> delta,
                                     std::span<const double> voltage = {},
                                     const std::vector<bool>& line_in_service = {});

/// Classical-model swing equations over a network, with the network quantities
/// precomputed. One instance may be shared read-only by several runs.
class SwingSystem {
 public:
  SwingSystem(const NetworkModel& model, std::vector<DisturbanceSpec> disturbances,
              double damping_d);

  int bus_count() const { return static_cast<int>(h_agg_.size()); }
  const std::vector<double>& aggregate_inertia() const { return h_agg_; }
  /// Pre-disturbance mechanical power (pu), generation scaled uniformly to the load.
  const std::vector<double>& mechanical_power() const { return p_mech_; }
  const std::vector<double>& load_power() const { return p_load_; }

  /// Angles solving the sine power flow with delta[0] = 0 and zero speed deviation.
  /// Flat (all zero) whenever every bus balances its own load.
  SwingState initial_state() const;

  /// One classical RK4 step. Disturbance status is frozen at the step midpoint.
  void step(SwingState& state, double dt) const;

  /// State derivative at time t with the given disturbance snapshot time.
  void derivative(double t_status, std::span<const double> delta,
                  std::span<const double> domega, std::span<double> d_delta,
                  std::span<double> d_domega) const;

  /// Net power imbalance sum_i (P_m,i - P_load,i) at time t (lossless network).
  double net_injection(double t) const;

 private:
  struct Snapshot {
    std::vector<double> p_mech;
    std::vector<double> p_load;
    std::vector<double> voltage;
    std::vector<bool> in_service;
  };
  Snapshot snapshot(double t) const;
  void derivative(const Snapshot& snap, std::span<const double> delta,
                  std::span<const double> domega, std::span<double> d_delta,
                  std::span<double> d_domega) const;

  NetworkModel model_;
  std::vector<DisturbanceSpec> disturbances_;
  double damping_;
  double omega_s_;
  std::vector<double> h_agg_;
  std::vector<double> p_mech_;
  std::vector<double> p_load_;
  std::vector<double> emf_;
  std::vector<double> reactance_;
};

/// Advances one RK4 step of config.dt under the given disturbances.
SwingState swing_step(const NetworkModel& model, const SwingState& state,
                      const SwingConfig& config, const std::vector<DisturbanceSpec>& disturbances);

/// Full trajectory from the steady-state initial condition. Channels per bus:
/// delta (rad) then domega (pu), sampled every record_every steps from t = 0.
TimeSeriesSet run_swing(const NetworkModel& model, const SwingConfig& config,
                        const std::vector<DisturbanceSpec>& disturbances);

}  // namespace transwave
