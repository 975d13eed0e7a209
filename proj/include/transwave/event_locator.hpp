#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "transwave/core_model.hpp"

namespace transwave {

struct SensorArrival {
  std::string sensor_id;
  Point2 position;        // km
  double arrival_t = 0.0; // s
  double weight = 1.0;
};

struct SearchBounds {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
};

struct LocatorOptions {
  int grid_cells = 50;              // per axis
  double inflate = 0.2;             // bounding-box growth when bounds are not given
  std::optional<SearchBounds> bounds;
  int max_iterations = 100;
  double step_tol_km = 1e-6;
};

struct LocationEstimate {
  Point2 position;
  double origin_t = 0.0;        // s
  double speed_used = 0.0;      // km/s
  double residual_rms = 0.0;    // s, weighted
  std::optional<double> abs_error_km;
  double cost = 0.0;            // J at the estimate
  double grid_cost = 0.0;       // J at the grid minimum
  int iterations = 0;
  bool refined = false;         // false: Gauss-Newton did not converge, grid minimum returned
  bool degenerate = false;      // geometry cannot separate the unknowns
  std::string warning;
};

/// Arrival times t_i = t0 + |p_i - event| / speed for each sensor position.
std::vector<SensorArrival> synthetic_arrivals(const std::vector<Point2>& sensors, Point2 event,
                                              double t0, double speed_kms);

/// Minimizes sum w_i (t_i - t0 - d_i/v)^2 over (x, y, t0) with the speed fixed:
/// grid search with t0 eliminated in closed form, then damped Gauss-Newton.
/// Needs three sensors with positive weight (Error(Underdetermined) otherwise).
LocationEstimate locate(const std::vector<SensorArrival>& arrivals, double speed_kms,
                        const LocatorOptions& options = {});

/// Same objective with the speed as a fourth unknown (kept positive); needs
/// four sensors with positive weight.
LocationEstimate estimate_speed_and_locate(const std::vector<SensorArrival>& arrivals,
                                           const LocatorOptions& options = {});

/// Objective J for a candidate; t0 supplied explicitly.
double locator_cost(const std::vector<SensorArrival>& arrivals, Point2 p, double t0,
                    double speed_kms);

/// CSV `sensor_id,x_km,y_km,arrival_s[,weight]` with a header row.
std::vector<SensorArrival> read_arrivals_csv(std::istream& in, const std::string& source_name = "<csv>");
std::vector<SensorArrival> read_arrivals_csv(const std::filesystem::path& path);
void write_arrivals_csv(std::ostream& out, const std::vector<SensorArrival>& arrivals);

/// `{x_km, y_km, t0_s, speed_kms, residual_rms_s, abs_error_km?}` plus solver flags.
std::string location_json(const LocationEstimate& est);

}  // namespace transwave
