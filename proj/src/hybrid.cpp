#include "transwave/hybrid.hpp"

#include <cmath>
#include <sstream>

#include "transwave/error.hpp"

namespace transwave {

void HybridConfig::validate(const NetworkModel& model) const {
  std::ostringstream msg;
  const double tau_min = min_travel_time(model);
  if (!(dt_em > 0.0) || dt_em > tau_min * (1.0 + 1e-9)) {
    msg << " dt_em=" << dt_em << " s must be in (0, tau_min=" << tau_min << " s];";
  }
  if (rate_ratio < 1) msg << " rate_ratio must be >= 1;";
  if (dt_mech() > 0.01 + 1e-12) msg << " rate_ratio*dt_em must be <= 0.01 s;";
  if (!(t_end > 0.0)) msg << " t_end must be > 0;";
  if (!(damping_d >= 0.0)) msg << " damping_d must be >= 0;";
  if (record_every < 1) msg << " record_every must be >= 1;";
  if (!msg.str().empty()) throw Error(ErrorKind::Configuration, "hybrid config:" + msg.str());
  for (const auto& bus : model.buses) {
    if (!bus.has_generator()) {
      throw Error(ErrorKind::Configuration,
                  "hybrid engine needs a generator at every bus; bus " + std::to_string(bus.id) +
                      " has none");
    }
  }
}

namespace {

/// Sliding mean over a window of `span` samples (fractional allowed); the
/// oldest retained sample enters with the fractional weight.
class CycleMean {
 public:
  CycleMean(int channels, double span)
      : span_(span),
        size_(static_cast<int>(std::floor(span)) + 1),
        tail_weight_(span - std::floor(span)),
        buf_(channels, std::vector<double>(size_)),
        sum_(channels, 0.0) {}

  void push(int ch, double value) {
    auto& slot = buf_[ch][head_];
    sum_[ch] += value - slot;
    slot = value;
  }
  void advance() {
    head_ = (head_ + 1) % size_;
    // Re-sum once per window so the running sums do not drift.
    if (head_ == 0) {
      for (std::size_t ch = 0; ch < buf_.size(); ++ch) {
        double s = 0.0;
        for (double v : buf_[ch]) s += v;
        sum_[ch] = s;
      }
    }
  }
  /// head_ points at the oldest sample after advance().
  double mean(int ch) const {
    return (sum_[ch] - (1.0 - tail_weight_) * buf_[ch][head_]) / span_;
  }

 private:
  double span_;
  int size_;
  double tail_weight_;
  int head_ = 0;
  std::vector<std::vector<double>> buf_;
  std::vector<double> sum_;
};

}  // namespace

TimeSeriesSet run_hybrid(const NetworkModel& model, const HybridConfig& config,
                         const std::vector<DisturbanceSpec>& disturbances) {
  require_valid(validate(model), "hybrid model");
  require_valid(validate(model, disturbances), "hybrid disturbances");
  config.validate(model);

  EmtConfig emt_cfg = config.emt;
  emt_cfg.dt = config.dt_em;
  emt_cfg.t_end = config.t_end;
  const double dt = emt_cfg.resolve_dt(model);
  const auto& bases = model.bases;
  const double omega_s = bases.omega_s();
  const int n = model.bus_count();
  const long preroll = std::lround(emt_cfg.preroll_cycles / bases.f_nominal / dt);
  const long steps = std::lround(config.t_end / dt);
  const double window = 0.5 / (bases.f_nominal * dt);
  const double watts_per_pu = bases.s_base * 1e6;

  EmtNetwork net(model, emt_cfg, dt, -static_cast<double>(preroll) * dt, disturbances);
  net.circuit.initialize_steady_state(omega_s);

  std::vector<double> h_agg(n);
  for (int i = 0; i < n; ++i) h_agg[i] = model.buses[i].aggregate_inertia(bases);

  CycleMean power(n, window);
  auto sample_power = [&] {
    for (int i = 0; i < n; ++i) {
      const int src = net.source_of_bus[i];
      power.push(i, net.circuit.source_emf(src) * net.circuit.source_current(src) / watts_per_pu);
    }
    power.advance();
  };
  for (long k = 1; k <= preroll; ++k) {
    net.circuit.step();
    sample_power();
  }

  // Mechanical power balances the measured steady state exactly.
  std::vector<double> p_mech0(n);
  for (int i = 0; i < n; ++i) p_mech0[i] = power.mean(i);

  std::vector<double> delta(n, 0.0), domega(n, 0.0);
  std::vector<double> delta_prev = delta, domega_prev = domega;
  double t_mech = 0.0;

  TimeSeriesSet series;
  for (int i = 0; i < n; ++i) {
    series.add_channel(i, Quantity::Voltage);
    series.add_channel(i, Quantity::Domega);
    series.add_channel(i, Quantity::Delta);
  }
  std::vector<std::vector<double>*> v_col(n), w_col(n), d_col(n);
  for (int i = 0; i < n; ++i) {
    v_col[i] = &series.find(i, Quantity::Voltage)->values;
    w_col[i] = &series.find(i, Quantity::Domega)->values;
    d_col[i] = &series.find(i, Quantity::Delta)->values;
  }
  const auto rows = static_cast<std::size_t>(steps / config.record_every + 1);
  series.times().reserve(rows);
  for (int i = 0; i < n; ++i) {
    v_col[i]->reserve(rows);
    w_col[i]->reserve(rows);
    d_col[i]->reserve(rows);
  }
  std::vector<std::size_t> pending;

  auto record = [&](long k) {
    series.times().push_back(k * dt);
    for (int i = 0; i < n; ++i) {
      v_col[i]->push_back(net.circuit.voltage(i));
      w_col[i]->push_back(domega[i]);
      d_col[i]->push_back(delta[i]);
    }
    if (k % config.rate_ratio != 0) pending.push_back(series.times().size() - 1);
  };
  auto fill_pending = [&](double t_new) {
    const double span = t_new - t_mech;
    for (std::size_t row : pending) {
      const double w = (series.times()[row] - t_mech) / span;
      for (int i = 0; i < n; ++i) {
        (*w_col[i])[row] = (1.0 - w) * domega_prev[i] + w * domega[i];
        (*d_col[i])[row] = (1.0 - w) * delta_prev[i] + w * delta[i];
      }
    }
    pending.clear();
  };

  // Swing RK4 over one mechanical step with electrical power held.
  auto mech_step = [&](const std::vector<double>& p_elec, double t0, double h) {
    std::vector<double> p_mech = p_mech0;
    for (const auto& d : disturbances) {
      if (d.kind == DisturbanceKind::GenerationTrip && d.active_at(t0 + 0.5 * h)) {
        p_mech[d.target] -= d.magnitude / bases.s_base;
      }
    }
    for (int i = 0; i < n; ++i) {
      auto accel = [&](double w) {
        return (p_mech[i] - p_elec[i] - config.damping_d * w) / (2.0 * h_agg[i]);
      };
      const double w0 = domega[i];
      const double k1w = accel(w0), k1d = omega_s * w0;
      const double w1 = w0 + 0.5 * h * k1w;
      const double k2w = accel(w1), k2d = omega_s * w1;
      const double w2 = w0 + 0.5 * h * k2w;
      const double k3w = accel(w2), k3d = omega_s * w2;
      const double w3 = w0 + h * k3w;
      const double k4w = accel(w3), k4d = omega_s * w3;
      domega[i] = w0 + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
      delta[i] += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
      if (!std::isfinite(domega[i]) || !std::isfinite(delta[i])) {
        std::ostringstream msg;
        msg << "hybrid swing integration diverged at bus " << i << ", t=" << t0 + h << " s";
        throw DivergenceError("swing", i, t0 + h, msg.str());
      }
    }
  };

  std::vector<int> stage(disturbances.size(), 0);
  std::vector<double> p_elec(n);
  record(0);
  for (long k = 1; k <= steps; ++k) {
    const double t_next = k * dt;
    for (int i = 0; i < n; ++i) {
      auto& wave = net.circuit.source_wave(net.source_of_bus[i]);
      wave.phase = delta[i] + omega_s * domega[i] * (t_next - t_mech);
    }
    apply_emt_events(net, model, disturbances, t_next, stage);
    net.circuit.step();
    sample_power();

    if (k % config.rate_ratio == 0) {
      for (int i = 0; i < n; ++i) p_elec[i] = power.mean(i);
      delta_prev = delta;
      domega_prev = domega;
      mech_step(p_elec, t_mech, t_next - t_mech);
      fill_pending(t_next);
      t_mech = t_next;
    }
    if (k % config.record_every == 0) record(k);
  }
  // Rows after the last mechanical step hold its state.
  for (std::size_t row : pending) {
    for (int i = 0; i < n; ++i) {
      (*w_col[i])[row] = domega[i];
      (*d_col[i])[row] = delta[i];
    }
  }
  return series;
}

}  // namespace transwave
