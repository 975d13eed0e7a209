#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace transwave {

/// System-wide bases. Electromechanical quantities are per unit on these;
/// the EMT engine works in SI.
struct SystemBases {
  double s_base = 100.0;     // MVA
  double v_base = 500.0;     // kV, line-to-line
  double f_nominal = 60.0;   // Hz

  double omega_s() const { return 2.0 * std::numbers::pi * f_nominal; }
  double z_base() const { return v_base * v_base / s_base; }  // ohm

  bool operator==(const SystemBases&) const = default;
};

struct Point2 {
  double x = 0.0;  // km
  double y = 0.0;  // km

  bool operator==(const Point2&) const = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Bus {
  int id = 0;
  Point2 coord;
  std::optional<double> gen_rating;  // MW per machine
  std::optional<double> inertia_h;   // s, per machine
  int coherent_count = 1;            // aggregated coherent machines
  double load_p = 0.0;               // MW
  double emf_pu = 1.0;

  bool has_generator() const { return gen_rating.has_value(); }

  /// Aggregate inertia on the system base: H * Coh * G / S_base.
  double aggregate_inertia(const SystemBases& bases) const;

  bool operator==(const Bus&) const = default;
};

enum class LengthUnit { Meter, Kilometer };

const char* to_string(LengthUnit unit);

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double length = 0.0;      // km
  double r_per_len = 0.0;   // ohm/km
  double l_per_len = 0.0;   // H per len_unit_em
  double c_per_len = 0.0;   // F per len_unit_em
  LengthUnit len_unit_em = LengthUnit::Meter;

  /// Line length expressed in len_unit_em.
  double em_length() const { return len_unit_em == LengthUnit::Meter ? length * 1000.0 : length; }

  bool operator==(const Line&) const = default;
};

struct NetworkModel {
  SystemBases bases;
  std::vector<Bus> buses;
  std::vector<Line> lines;

  int bus_count() const { return static_cast<int>(buses.size()); }
  int line_count() const { return static_cast<int>(lines.size()); }

  /// Line indices incident to each bus.
  std::vector<std::vector<int>> incidence() const;
  std::vector<int> degrees() const;

  bool operator==(const NetworkModel&) const = default;
};

enum class DisturbanceKind { GenerationTrip, LoadShed, LineTrip, Fault };

const char* to_string(DisturbanceKind kind);
std::optional<DisturbanceKind> parse_disturbance_kind(const std::string& text);

struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::Fault;
  int target = 0;                   // bus id, or line index for LineTrip
  double t_onset = 0.0;             // s
  double magnitude = 0.0;           // MW, or fault resistance in ohm for Fault
  double duration = kDefaultFaultDuration;  // s, Fault only

  static constexpr double kDefaultFaultDuration = 0.1;
  static constexpr double kDefaultFaultResistance = 1.0;

  bool targets_line() const { return kind == DisturbanceKind::LineTrip; }
  /// True while the disturbance is in effect at time t.
  bool active_at(double t) const;

  bool operator==(const DisturbanceSpec&) const = default;
};

struct Violation {
  std::string code;
  std::string message;

  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

/// Checks every model invariant; an empty report means the model is valid.
ValidationReport validate(const NetworkModel& model);
ValidationReport validate(const NetworkModel& model, const DisturbanceSpec& disturbance);
ValidationReport validate(const NetworkModel& model, const std::vector<DisturbanceSpec>& disturbances);

/// Throws Error(Validation) listing every violation if the report is non-empty.
void require_valid(const ValidationReport& report, const std::string& context);

/// Closed ring of identical buses. Adjacent buses sit line_km apart on a circle.
NetworkModel build_ring(int n_buses, double line_km, const Bus& bus_template,
                        const Line& line_template, const SystemBases& bases = {});

/// rows x cols grid graph, bus (r, c) at (c*spacing, r*spacing), row-major ids.
NetworkModel build_mesh(int rows, int cols, double spacing_km, const Bus& bus_template,
                        const Line& line_template, const SystemBases& bases = {});

/// Shortest along-line distance (km) from origin to every bus; +inf when unreachable.
std::vector<double> path_distances(const NetworkModel& model, int origin,
                                   const std::vector<bool>& line_in_service = {});

/// True when the model is a single simple cycle through every bus.
bool is_ring(const NetworkModel& model);

}  // namespace transwave
