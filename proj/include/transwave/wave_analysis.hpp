#pragma once

#include <optional>
#include <string>
#include <vector>

#include "transwave/core_model.hpp"
#include "transwave/emt.hpp"
#include "transwave/swing.hpp"
#include "transwave/time_series.hpp"

namespace transwave {

/// Speed of light in vacuum, 1/sqrt(mu0*eps0), m/s. Reference value for EM line speeds.
inline constexpr double kLightSpeed = 2.998e8;

/// Inputs of the continuum electromechanical wave-speed formula.
struct TheoryInputs {
  double omega = 0.0;   // rad/s
  double v_pu = 1.0;    // source voltage, pu
  double theta = 0.0;   // line impedance angle, rad
  double h = 0.0;       // inertia per unit length, s/km
  double z_abs = 0.0;   // |z| per km, pu/km
};

/// h = H*coh*N*G / (s_base*line_km*(N-1)), s/km.
double inertia_density(double h_const, double coh, double n_groups, double g_mw, double s_base,
                       double line_km);

/// sqrt(omega*V^2*sin(theta) / (2*h*|z|)), km/s.
double speed_mech_theory(const TheoryInputs& in);

/// Closed-form speeds for a model, using mean generator and line parameters.
struct TheoryReport {
  double h_s_per_km = 0.0;
  double v_mech_kms = 0.0;
  double v_em_ms = 0.0;       // 1/sqrt(LC) of the mean line, m/s
  double light_speed_ms = kLightSpeed;
  TheoryInputs inputs;
};

/// Throws Error(Configuration) naming the missing fields when no bus carries
/// gen_rating and inertia_h.
TheoryReport theory_report(const NetworkModel& model);

struct BusArrival {
  int bus = 0;
  double distance_km = 0.0;
  std::optional<double> arrival_t;  // s
};

struct ArrivalReport {
  Quantity quantity = Quantity::Domega;
  int origin = 0;
  double threshold = 0.0;
  double t_onset = 0.0;
  std::vector<BusArrival> buses;   // ascending bus id
  double fitted_speed_kms = 0.0;   // slope of distance on arrival time
  double fit_intercept_km = 0.0;
  double fit_r2 = 0.0;

  int detected() const;
  const BusArrival& at(int bus) const;
};

/// Default threshold: 1e-4 pu for domega and delta, 2% of the nominal peak for voltage.
double default_threshold(Quantity q, const NetworkModel& model);

/// First time each bus's |x(t) - baseline(t)| exceeds `threshold` at or after
/// t_onset, linearly interpolated between samples. The baseline of domega and
/// delta is the last sample before the onset; for voltage it is the last
/// pre-onset fundamental cycle repeated periodically. Distances are shortest
/// along-line paths. Throws Error(InsufficientArrivals) with fewer than two
/// detections.
ArrivalReport detect_arrivals(const TimeSeriesSet& series, Quantity quantity, int origin,
                              const NetworkModel& model, double threshold, double t_onset = 0.0);

/// Least-squares line y = a + b x; returns {b, a, r2}.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

enum class SweepParameter { InertiaH, LPerLen, CPerLen };
enum class SweepEngine { Swing, Emt };

const char* to_string(SweepParameter p);
std::optional<SweepParameter> parse_sweep_parameter(const std::string& text);
const char* to_string(SweepEngine e);
std::optional<SweepEngine> parse_sweep_engine(const std::string& text);

/// Copy of `base` with the parameter set on every bus or line. Changing
/// l_per_len also scales r_per_len by the same ratio, since the swing engine
/// takes its series reactance from r_per_len.
NetworkModel with_parameter(const NetworkModel& base, SweepParameter p, double value);

struct SweepConfig {
  NetworkModel base;
  std::vector<DisturbanceSpec> disturbances;
  SweepParameter parameter = SweepParameter::InertiaH;
  std::vector<double> values;
  SweepEngine engine = SweepEngine::Swing;
  int origin = 0;
  double threshold = 0.0;   // 0 selects default_threshold
  SwingConfig swing;
  EmtConfig emt;
  int threads = 0;          // 0: hardware concurrency capped by TRANSWAVE_THREADS
};

struct SweepPoint {
  double value = 0.0;
  double fitted_speed = 0.0;   // km/s for swing, m/s for emt
  double theory_speed = 0.0;   // same unit
  bool ok = false;
  std::string status;          // "ok" or the error message
};

/// Runs one simulation per value (concurrently) and fits the propagation speed.
/// Failed points are flagged and do not stop the sweep. Result order follows `values`.
std::vector<SweepPoint> run_sensitivity_sweep(const SweepConfig& config);

/// Worker count: `requested` if positive, else hardware concurrency, then capped
/// by the TRANSWAVE_THREADS environment variable when set.
int sweep_thread_count(int requested, std::size_t jobs);

struct ReflectionReport {
  std::vector<int> meeting_buses;  // farthest bus (even ring) or the two farthest (odd ring)
  int path_bus_a = 0;              // bus whose arrival times the two directions
  int path_bus_b = 0;
  double path_time_a = 0.0;
  double path_time_b = 0.0;
  double meeting_time = 0.0;       // s
  double tolerance = 0.0;          // one sample of the series
  bool paths_agree = false;
};

/// Locates where the two counter-propagating fronts from `origin` meet on a ring.
/// Throws Error(Topology) for non-ring models.
ReflectionReport detect_reflection(const TimeSeriesSet& series, int origin,
                                   const NetworkModel& model, double threshold = 1e-4,
                                   double t_onset = 0.0);

struct CycleResidual {
  double t_start = 0.0;   // s
  double max_abs = 0.0;   // same unit as the channel
};

/// Electromagnetic transient content of a waveform: the samples are cut into
/// consecutive one-cycle windows from t_from, each window is fitted with
/// a*sin(wt) + b*cos(wt) + c at the fundamental, and the largest residual is kept.
std::vector<CycleResidual> fundamental_residual(const TimeSeriesSet& series, int bus,
                                                Quantity quantity, double f_nominal,
                                                double t_from = 0.0);

enum class EventClass { NoEvent, GenerationTrip, LoadShed, LineTrip };
const char* to_string(EventClass c);

struct Classification {
  EventClass kind = EventClass::NoEvent;
  double late_mean = 0.0;   // mean domega over buses and the last 20% of samples, pu
  double energy = 0.0;      // integral of the bus-mean domega^2, pu^2 s
};

/// Sign of the quasi-steady frequency deviation decides trip vs shed; a
/// near-zero mean with transient energy above `noise_floor` is a line trip.
Classification classify_event(const TimeSeriesSet& series, double eps = 1e-4,
                              double noise_floor = 1e-12);

}  // namespace transwave
