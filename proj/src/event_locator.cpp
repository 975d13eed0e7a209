#include "transwave/event_locator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"
#include "transwave/error.hpp"

namespace transwave {

std::vector<SensorArrival> synthetic_arrivals(const std::vector<Point2>& sensors, Point2 event,
                                              double t0, double speed_kms) {
  std::vector<SensorArrival> out;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    out.push_back({"s" + std::to_string(i), sensors[i], t0 + distance(sensors[i], event) / speed_kms, 1.0});
  }
  return out;
}

double locator_cost(const std::vector<SensorArrival>& arrivals, Point2 p, double t0,
                    double speed_kms) {
  double j = 0.0;
  for (const auto& a : arrivals) {
    const double r = a.arrival_t - t0 - distance(a.position, p) / speed_kms;
    j += a.weight * r * r;
  }
  return j;
}

namespace {

std::vector<SensorArrival> active_sensors(const std::vector<SensorArrival>& arrivals,
                                          std::size_t needed, const char* what) {
  std::vector<SensorArrival> act;
  for (const auto& a : arrivals) {
    if (!std::isfinite(a.arrival_t) || !std::isfinite(a.position.x) || !std::isfinite(a.position.y)) {
      throw Error(ErrorKind::Configuration, "sensor '" + a.sensor_id + "' has a non-finite value");
    }
    if (!(a.weight >= 0.0)) {
      throw Error(ErrorKind::Configuration, "sensor '" + a.sensor_id + "' has a negative weight");
    }
    if (a.weight > 0.0) act.push_back(a);
  }
  if (act.size() < needed) {
    throw Error(ErrorKind::Underdetermined,
                std::string(what) + " needs at least " + std::to_string(needed) +
                    " sensors with positive weight, got " + std::to_string(act.size()));
  }
  return act;
}

bool collinear(const std::vector<SensorArrival>& s) {
  double mx = 0.0, my = 0.0;
  for (const auto& a : s) {
    mx += a.position.x;
    my += a.position.y;
  }
  mx /= s.size();
  my /= s.size();
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& a : s) {
    sxx += (a.position.x - mx) * (a.position.x - mx);
    syy += (a.position.y - my) * (a.position.y - my);
    sxy += (a.position.x - mx) * (a.position.y - my);
  }
  const double tr = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double lo = 0.5 * tr - disc, hi = 0.5 * tr + disc;
  return !(hi > 0.0) || lo <= 1e-10 * hi;
}

SearchBounds resolve_bounds(const std::vector<SensorArrival>& s, const LocatorOptions& opt) {
  if (opt.bounds) {
    const auto& b = *opt.bounds;
    if (!(b.x_max > b.x_min) || !(b.y_max > b.y_min)) {
      throw Error(ErrorKind::Configuration, "search bounds must have max > min on both axes");
    }
    return b;
  }
  SearchBounds b{s[0].position.x, s[0].position.x, s[0].position.y, s[0].position.y};
  for (const auto& a : s) {
    b.x_min = std::min(b.x_min, a.position.x);
    b.x_max = std::max(b.x_max, a.position.x);
    b.y_min = std::min(b.y_min, a.position.y);
    b.y_max = std::max(b.y_max, a.position.y);
  }
  // A flat box (collinear sensors) borrows the other axis' span.
  const double span = std::max({b.x_max - b.x_min, b.y_max - b.y_min, 1.0});
  double w = b.x_max - b.x_min, h = b.y_max - b.y_min;
  if (w < 1e-9 * span) w = span;
  if (h < 1e-9 * span) h = span;
  const double cx = 0.5 * (b.x_min + b.x_max), cy = 0.5 * (b.y_min + b.y_max);
  const double hw = 0.5 * w * (1.0 + opt.inflate), hh = 0.5 * h * (1.0 + opt.inflate);
  return {cx - hw, cx + hw, cy - hh, cy + hh};
}

constexpr double kMinSlowness = 1e-12;  // s/km

// Parameters: x, y, t0 and, when joint, slowness s = 1/v.
struct Problem {
  const std::vector<SensorArrival>& s;
  bool joint;
  double fixed_slowness;

  double slowness(const Eigen::VectorXd& p) const { return joint ? p(3) : fixed_slowness; }

  double cost(const Eigen::VectorXd& p) const {
    return locator_cost(s, {p(0), p(1)}, p(2), 1.0 / slowness(p));
  }

  void linearize(const Eigen::VectorXd& p, Eigen::MatrixXd& jac, Eigen::VectorXd& r) const {
    const auto m = static_cast<Eigen::Index>(s.size());
    jac.setZero(m, p.size());
    r.resize(m);
    const double sl = slowness(p);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& a = s[i];
      const double sw = std::sqrt(a.weight);
      const double dx = p(0) - a.position.x, dy = p(1) - a.position.y;
      const double d = std::hypot(dx, dy);
      r(i) = sw * (a.arrival_t - p(2) - sl * d);
      if (d > 0.0) {
        jac(i, 0) = -sw * sl * dx / d;
        jac(i, 1) = -sw * sl * dy / d;
      }
      jac(i, 2) = -sw;
      if (joint) jac(i, 3) = -sw * d;
    }
  }

  // Closed-form t0 (and slowness when joint) at a fixed position.
  Eigen::VectorXd eliminate(Point2 pos) const {
    double sw = 0.0, sd = 0.0, st = 0.0;
    for (const auto& a : s) {
      const double d = distance(a.position, pos);
      sw += a.weight;
      sd += a.weight * d;
      st += a.weight * a.arrival_t;
    }
    const double md = sd / sw, mt = st / sw;
    double sl = fixed_slowness;
    if (joint) {
      double sdd = 0.0, sdt = 0.0;
      for (const auto& a : s) {
        const double d = distance(a.position, pos) - md;
        sdd += a.weight * d * d;
        sdt += a.weight * d * (a.arrival_t - mt);
      }
      sl = sdd > 0.0 ? std::max(sdt / sdd, kMinSlowness) : kMinSlowness;
    }
    Eigen::VectorXd p(joint ? 4 : 3);
    p(0) = pos.x;
    p(1) = pos.y;
    p(2) = mt - sl * md;
    if (joint) p(3) = sl;
    return p;
  }
};

LocationEstimate solve(const Problem& prob, const LocatorOptions& opt) {
  if (opt.grid_cells < 1) throw Error(ErrorKind::Configuration, "grid_cells must be >= 1");
  const auto b = resolve_bounds(prob.s, opt);

  // Grid search; strict '<' keeps the lowest x, then lowest y, on ties.
  Eigen::VectorXd best;
  double best_cost = std::numeric_limits<double>::infinity();
  const int n = opt.grid_cells;
  for (int i = 0; i <= n; ++i) {
    const double x = b.x_min + (b.x_max - b.x_min) * i / n;
    for (int j = 0; j <= n; ++j) {
      const double y = b.y_min + (b.y_max - b.y_min) * j / n;
      const auto p = prob.eliminate({x, y});
      const double c = prob.cost(p);
      if (c < best_cost) {
        best_cost = c;
        best = p;
      }
    }
  }

  LocationEstimate est;
  est.grid_cost = best_cost;
  Eigen::VectorXd p = best;
  double cost = best_cost;
  double lambda = 1e-3;
  bool converged = false;
  Eigen::MatrixXd jac;
  Eigen::VectorXd r;
  int it = 0;
  for (; it < opt.max_iterations && !converged; ++it) {
    prob.linearize(p, jac, r);
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    Eigen::MatrixXd damped = a;
    for (Eigen::Index k = 0; k < a.rows(); ++k) damped(k, k) += lambda * std::max(a(k, k), 1e-12);
    const Eigen::VectorXd step = damped.ldlt().solve(-g);
    if (!step.allFinite()) break;
    const double xy = std::hypot(step(0), step(1));
    Eigen::VectorXd trial = p + step;
    const bool feasible = !prob.joint || trial(3) > 0.0;
    const double c = feasible ? prob.cost(trial) : std::numeric_limits<double>::infinity();
    if (c <= cost) {
      p = trial;
      cost = c;
      lambda = std::max(lambda * 0.1, 1e-12);
      if (xy < opt.step_tol_km) converged = true;
    } else {
      lambda *= 10.0;
      // The damped step can no longer improve J: already at the minimum.
      if (xy < opt.step_tol_km || lambda > 1e16) converged = true;
    }
  }
  est.iterations = it;
  est.refined = converged;
  if (!converged) {
    p = best;
    cost = best_cost;
    est.warning = "Gauss-Newton did not converge; returning the grid minimum";
  }
  est.position = {p(0), p(1)};
  est.origin_t = p(2);
  est.speed_used = 1.0 / prob.slowness(p);
  est.cost = cost;
  double wsum = 0.0;
  for (const auto& a : prob.s) wsum += a.weight;
  est.residual_rms = std::sqrt(cost / wsum);
  return est;
}

void flag(LocationEstimate& est, const std::string& msg) {
  est.degenerate = true;
  est.warning = est.warning.empty() ? msg : est.warning + "; " + msg;
}

}  // namespace

LocationEstimate locate(const std::vector<SensorArrival>& arrivals, double speed_kms,
                        const LocatorOptions& options) {
  if (!(speed_kms > 0.0)) throw Error(ErrorKind::Configuration, "locate: speed must be > 0");
  const auto act = active_sensors(arrivals, 3, "locate");
  Problem prob{act, false, 1.0 / speed_kms};
  auto est = solve(prob, options);
  if (collinear(act)) flag(est, "sensors are collinear; position is mirror-ambiguous");
  return est;
}

LocationEstimate estimate_speed_and_locate(const std::vector<SensorArrival>& arrivals,
                                           const LocatorOptions& options) {
  const auto act = active_sensors(arrivals, 4, "estimate_speed_and_locate");
  Problem prob{act, true, 0.0};
  auto est = solve(prob, options);
  if (collinear(act)) flag(est, "sensors are collinear; position is mirror-ambiguous");
  // Speed and origin time separate only if the sensor distances differ.
  double sw = 0.0, sd = 0.0;
  for (const auto& a : act) {
    sw += a.weight;
    sd += a.weight * distance(a.position, est.position);
  }
  const double md = sd / sw;
  double var = 0.0;
  for (const auto& a : act) {
    const double d = distance(a.position, est.position) - md;
    var += a.weight * d * d;
  }
  var /= sw;
  if (var <= 1e-8 * std::max(md * md, 1.0)) {
    flag(est, "sensors are equidistant from the estimate; speed and origin time are not separable");
  }
  return est;
}

namespace {

double parse_number(const std::string& field, const std::string& where) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) throw Error(ErrorKind::Parse, where + ": not a number: '" + field + "'");
  return v;
}

}  // namespace

std::vector<SensorArrival> read_arrivals_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  std::vector<SensorArrival> out;
  int row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    const std::string where = source_name + ":" + std::to_string(row);
    if (!header_seen) {
      header_seen = true;
      if (f.size() < 4 || f.size() > 5 || f[0] != "sensor_id" || f[1] != "x_km" || f[2] != "y_km" ||
          f[3] != "arrival_s" || (f.size() == 5 && f[4] != "weight")) {
        throw Error(ErrorKind::Parse, where + ": expected header sensor_id,x_km,y_km,arrival_s[,weight]");
      }
      continue;
    }
    if (f.size() < 4 || f.size() > 5) {
      throw Error(ErrorKind::Parse, where + ": expected 4 or 5 fields, got " + std::to_string(f.size()));
    }
    SensorArrival a;
    a.sensor_id = f[0];
    a.position.x = parse_number(f[1], where + ":2");
    a.position.y = parse_number(f[2], where + ":3");
    a.arrival_t = parse_number(f[3], where + ":4");
    if (f.size() == 5) a.weight = parse_number(f[4], where + ":5");
    out.push_back(a);
  }
  if (!header_seen) throw Error(ErrorKind::Parse, source_name + ": empty arrivals file");
  return out;
}

std::vector<SensorArrival> read_arrivals_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  return read_arrivals_csv(in, path.string());
}

void write_arrivals_csv(std::ostream& out, const std::vector<SensorArrival>& arrivals) {
  out << "sensor_id,x_km,y_km,arrival_s,weight\n";
  char buf[160];
  for (const auto& a : arrivals) {
    // Full precision so a written file reads back bit-identical.
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g\n", a.position.x, a.position.y,
                  a.arrival_t, a.weight);
    out << a.sensor_id << buf;
  }
}

std::string location_json(const LocationEstimate& est) {
  nlohmann::ordered_json j;
  j["x_km"] = est.position.x;
  j["y_km"] = est.position.y;
  j["t0_s"] = est.origin_t;
  j["speed_kms"] = est.speed_used;
  j["residual_rms_s"] = est.residual_rms;
  if (est.abs_error_km) j["abs_error_km"] = *est.abs_error_km;
  j["refined"] = est.refined;
  j["degenerate"] = est.degenerate;
  j["iterations"] = est.iterations;
  if (!est.warning.empty()) j["warning"] = est.warning;
  return j.dump(2);
}

}  // namespace transwave
