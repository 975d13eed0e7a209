#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "transwave/core_model.hpp"
#include "transwave/time_series.hpp"

namespace transwave {

/// Propagation speed 1/sqrt(L C) of a lossless line, in len_unit_em per second.
double propagation_speed_em(const Line& line);
/// Same speed converted to km/s.
double propagation_speed_em_kms(const Line& line);
double surge_impedance(const Line& line);
/// One-way travel time (s) over the full line length.
double travel_time(const Line& line);

namespace emt {

inline constexpr int kGround = -1;

/// Lossless traveling-wave line discretized with delayed history currents at
/// each end. The stored quantity per end is the outgoing wave b = v/zc + i,
/// which reaches the other end tau later.
class BergeronLine {
 public:
  BergeronLine(int from, int to, double zc, double tau, double dt);

  int from() const { return from_; }
  int to() const { return to_; }
  double zc() const { return zc_; }
  double tau() const { return tau_; }
  /// Number of whole steps in the travel time, round(tau / dt).
  int delay_steps() const { return static_cast<int>(std::lround(tau_ / dt_)); }

  /// Outgoing wave emitted at `end` (0 = from, 1 = to) `tau` before the sample
  /// that follows the newest stored one, linearly interpolated between slots.
  double delayed_wave(int end) const;
  /// Stores the outgoing waves of the newest sample.
  void push(double b_from, double b_to);
  /// Overwrites the whole history with a function of time offset (s, <= 0).
  template <class F>
  void fill_history(F&& wave_at) {
    for (int k = 0; k < depth_; ++k) {
      const double offset = -static_cast<double>(depth_ - 1 - k) * dt_;
      buf_[0][slot(k)] = wave_at(0, offset);
      buf_[1][slot(k)] = wave_at(1, offset);
    }
  }
  void clear();
  /// Electromagnetic energy carried by the waves currently in flight.
  double stored_energy() const;

 private:
  // k = 0 is the oldest slot, depth_-1 the newest.
  int slot(int k) const { return (head_ + k) % depth_; }

  int from_;
  int to_;
  double zc_;
  double tau_;
  double dt_;
  int whole_;      // floor(tau/dt)
  double frac_;    // tau/dt - whole_
  int depth_;
  int head_ = 0;   // index of the oldest slot
  std::vector<double> buf_[2];
};

/// Sinusoid amplitude*sin(omega*t + phase), or an arbitrary waveform when `custom` is set.
struct SourceWave {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  std::function<double(double)> custom;

  double operator()(double t) const {
    return custom ? custom(t) : amplitude * std::sin(omega * t + phase);
  }
};

/// Nodal circuit solved with trapezoidal companion models and Bergeron lines.
/// Node indices run 0..n-1; kGround is the reference.
class Circuit {
 public:
  Circuit(int node_count, double dt, double t_start = 0.0);

  int node_count() const { return n_; }
  double dt() const { return dt_; }
  double time() const { return t_start_ + static_cast<double>(step_) * dt_; }
  long step_index() const { return step_; }

  int add_resistor(int a, int b, double r);
  int add_inductor(int a, int b, double l);
  int add_capacitor(int a, int b, double c);
  int add_line(int a, int b, double zc, double tau);
  /// EMF from ground to `node` behind series R and L. With r = l = 0 the source
  /// is ideal and fixes the node voltage.
  int add_source(int node, SourceWave wave, double r, double l);
  int add_switch(int a, int b, double r_closed, bool closed);

  void set_switch(int id, bool closed);
  void set_resistance(int id, double r);
  void set_line_in_service(int id, bool in_service);
  SourceWave& source_wave(int id) { return sources_[id].wave; }

  /// Initializes every history term from the sinusoidal steady state at `omega`,
  /// assuming all sources are sinusoids of that frequency.
  void initialize_steady_state(double omega);

  /// Advances one dt.
  void step();

  double voltage(int node) const { return node == kGround ? 0.0 : v_(node); }
  const Eigen::VectorXd& voltages() const { return v_; }
  /// Current flowing into the line at `end` (0 = from, 1 = to) at the current time.
  double line_current(int id, int end) const;
  /// Current delivered by the source into its node at the current time.
  double source_current(int id) const { return sources_[id].i; }
  double source_emf(int id) const { return sources_[id].e; }
  double stored_line_energy() const;
  const BergeronLine& line(int id) const { return lines_[id].model; }

 private:
  struct Branch {  // R, L, C or switch between two nodes
    enum class Kind { Resistor, Inductor, Capacitor, Switch } kind;
    int a, b;
    double value;   // ohm, henry or farad
    bool closed = true;
    double g = 0.0;
    double i = 0.0;     // current a -> b
    double v = 0.0;     // v_a - v_b
  };
  struct LineSlot {
    BergeronLine model;
    bool in_service = true;
    double hist[2] = {0.0, 0.0};
  };
  struct Source {
    int node;
    SourceWave wave;
    double r, l;
    double g = 0.0;
    double a = 0.0;       // history decay factor for the series RL branch
    double i = 0.0;       // into node
    double u = 0.0;       // e - v_node
    double e = 0.0;
    bool ideal() const { return r == 0.0 && l == 0.0; }
  };

  void check_node(int node) const;
  double branch_conductance(const Branch& br) const;
  void refactor();
  void stamp(Eigen::MatrixXd& g, int a, int b, double value) const;

  int n_;
  double dt_;
  double t_start_;
  long step_ = 0;
  std::vector<Branch> branches_;
  std::vector<LineSlot> lines_;
  std::vector<Source> sources_;

  bool dirty_ = true;
  int unknown_count_ = 0;
  std::vector<int> unknown_;     // node -> index in the reduced system, -1 if fixed
  std::vector<int> fixed_by_;    // node -> ideal source id, -1 if free
  Eigen::MatrixXd g_full_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  Eigen::VectorXd v_;
};

}  // namespace emt

struct EmtConfig {
  double dt = 0.0;                  // s; 0 selects min(tau_min / 10, 1 us)
  double t_end = 0.04;              // s
  double source_resistance = 0.1;   // ohm, series with every generator EMF
  double source_xd_pu = 0.3;        // series reactance on each generator group's own rating
  double preroll_cycles = 5.0;      // fundamental cycles simulated before t = 0
  int record_every = 1;

  /// Effective step for the model (resolves the default) after checking bounds.
  double resolve_dt(const NetworkModel& model) const;
};

/// Minimum one-way travel time over all lines.
double min_travel_time(const NetworkModel& model);

/// Circuit built from a network: one node per bus, a source per generator bus,
/// constant-impedance loads and Bergeron lines. Indices map model items to circuit ids.
struct EmtNetwork {
  emt::Circuit circuit;
  std::vector<int> source_of_bus;   // -1 when the bus has no generator
  std::vector<int> load_of_bus;     // -1 when the bus has no load
  std::vector<int> line_id;         // model line -> circuit line
  std::vector<int> fault_switch;    // per disturbance, -1 unless Fault
  double v_peak_nominal = 0.0;      // V

  EmtNetwork(const NetworkModel& model, const EmtConfig& config, double dt, double t_start,
             const std::vector<DisturbanceSpec>& disturbances);
};

/// Load resistance (ohm) drawing `p_mw` at nominal voltage; single-phase
/// equivalent carrying the three-phase power.
double load_resistance(const SystemBases& bases, double p_mw);

/// Applies disturbance switching due at the circuit's next step; returns true
/// when anything changed.
bool apply_emt_events(EmtNetwork& net, const NetworkModel& model,
                      const std::vector<DisturbanceSpec>& disturbances, double t_next,
                      std::vector<int>& stage);

/// Bus-voltage waveforms (V) from t = 0 after a steady-state pre-roll.
TimeSeriesSet run_emt(const NetworkModel& model, const EmtConfig& config,
                      const std::vector<DisturbanceSpec>& disturbances);

}  // namespace transwave
