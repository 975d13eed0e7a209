#include "transwave/core_model.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "transwave/error.hpp"

namespace transwave {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Topology: return "topology";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::SingularLine: return "singular-line";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::IsolatedNode: return "isolated-node";
    case ErrorKind::InsufficientArrivals: return "insufficient-arrivals";
    case ErrorKind::Underdetermined: return "underdetermined";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

double Bus::aggregate_inertia(const SystemBases& bases) const {
  if (!gen_rating || !inertia_h) return 0.0;
  return *inertia_h * coherent_count * *gen_rating / bases.s_base;
}

const char* to_string(LengthUnit unit) { return unit == LengthUnit::Meter ? "m" : "km"; }

const char* to_string(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::GenerationTrip: return "generation_trip";
    case DisturbanceKind::LoadShed: return "load_shed";
    case DisturbanceKind::LineTrip: return "line_trip";
    case DisturbanceKind::Fault: return "fault";
  }
  return "unknown";
}

std::optional<DisturbanceKind> parse_disturbance_kind(const std::string& text) {
  for (auto kind : {DisturbanceKind::GenerationTrip, DisturbanceKind::LoadShed,
                    DisturbanceKind::LineTrip, DisturbanceKind::Fault}) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

bool DisturbanceSpec::active_at(double t) const {
  if (t < t_onset) return false;
  if (kind == DisturbanceKind::Fault) return t < t_onset + duration;
  return true;
}

std::vector<std::vector<int>> NetworkModel::incidence() const {
  std::vector<std::vector<int>> result(buses.size());
  for (int k = 0; k < line_count(); ++k) {
    const auto& line = lines[k];
    if (line.from_bus >= 0 && line.from_bus < bus_count()) result[line.from_bus].push_back(k);
    if (line.to_bus >= 0 && line.to_bus < bus_count() && line.to_bus != line.from_bus)
      result[line.to_bus].push_back(k);
  }
  return result;
}

std::vector<int> NetworkModel::degrees() const {
  std::vector<int> deg;
  for (const auto& inc : incidence()) deg.push_back(static_cast<int>(inc.size()));
  return deg;
}

namespace {

void add(ValidationReport& report, std::string code, const std::ostringstream& msg) {
  report.push_back({std::move(code), msg.str()});
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

ValidationReport validate(const NetworkModel& model) {
  ValidationReport report;
  const auto& b = model.bases;
  if (!positive(b.s_base) || !positive(b.v_base) || !positive(b.f_nominal)) {
    std::ostringstream msg;
    msg << "bases must be strictly positive (s_base=" << b.s_base << ", v_base=" << b.v_base
        << ", f_nominal=" << b.f_nominal << ")";
    add(report, "bases", msg);
  }

  const int n = model.bus_count();
  std::set<int> seen;
  for (std::size_t pos = 0; pos < model.buses.size(); ++pos) {
    const auto& bus = model.buses[pos];
    if (!seen.insert(bus.id).second) {
      std::ostringstream msg;
      msg << "duplicate bus id " << bus.id;
      add(report, "bus.duplicate_id", msg);
    }
    if (bus.id != static_cast<int>(pos)) {
      std::ostringstream msg;
      msg << "bus at position " << pos << " has id " << bus.id << "; ids must be dense 0..n-1";
      add(report, "bus.id_order", msg);
    }
    if (bus.gen_rating.has_value() != bus.inertia_h.has_value()) {
      std::ostringstream msg;
      msg << "bus " << bus.id << ": gen_rating and inertia_h must be given together";
      add(report, "bus.generator_fields", msg);
    }
    if (bus.gen_rating && !positive(*bus.gen_rating)) {
      std::ostringstream msg;
      msg << "bus " << bus.id << ": gen_rating must be > 0";
      add(report, "bus.gen_rating", msg);
    }
    if (bus.inertia_h && !positive(*bus.inertia_h)) {
      std::ostringstream msg;
      msg << "bus " << bus.id << ": inertia_h must be > 0";
      add(report, "bus.inertia_h", msg);
    }
    if (bus.coherent_count < 1) {
      std::ostringstream msg;
      msg << "bus " << bus.id << ": coherent_count must be >= 1";
      add(report, "bus.coherent_count", msg);
    }
    if (!std::isfinite(bus.load_p) || bus.load_p < 0.0) {
      std::ostringstream msg;
      msg << "bus " << bus.id << ": load_p must be >= 0";
      add(report, "bus.load_p", msg);
    }
    if (!positive(bus.emf_pu)) {
      std::ostringstream msg;
      msg << "bus " << bus.id << ": emf_pu must be > 0";
      add(report, "bus.emf_pu", msg);
    }
  }

  bool endpoints_ok = true;
  for (int k = 0; k < model.line_count(); ++k) {
    const auto& line = model.lines[k];
    for (int end : {line.from_bus, line.to_bus}) {
      if (end < 0 || end >= n) {
        std::ostringstream msg;
        msg << "line " << k << ": endpoint " << end << " references no bus";
        add(report, "line.endpoint", msg);
        endpoints_ok = false;
      }
    }
    if (line.from_bus == line.to_bus) {
      std::ostringstream msg;
      msg << "line " << k << ": from_bus equals to_bus (" << line.from_bus << ")";
      add(report, "line.self_loop", msg);
    }
    if (!positive(line.length)) {
      std::ostringstream msg;
      msg << "line " << k << ": length must be > 0";
      add(report, "line.length", msg);
    }
    if (!positive(line.l_per_len) || !positive(line.c_per_len)) {
      std::ostringstream msg;
      msg << "line " << k << ": l_per_len and c_per_len must be > 0";
      add(report, "line.lc", msg);
    }
    if (!std::isfinite(line.r_per_len) || line.r_per_len < 0.0) {
      std::ostringstream msg;
      msg << "line " << k << ": r_per_len must be >= 0";
      add(report, "line.r_per_len", msg);
    }
  }

  if (n == 0) {
    report.push_back({"network.empty", "network has no buses"});
  } else if (endpoints_ok) {
    std::vector<bool> reached(n, false);
    std::vector<std::vector<int>> adj(n);
    for (const auto& line : model.lines) {
      adj[line.from_bus].push_back(line.to_bus);
      adj[line.to_bus].push_back(line.from_bus);
    }
    std::queue<int> frontier;
    frontier.push(0);
    reached[0] = true;
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop();
      for (int v : adj[u]) {
        if (!reached[v]) {
          reached[v] = true;
          frontier.push(v);
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      if (!reached[i]) {
        std::ostringstream msg;
        msg << "bus at position " << i << " is not connected to bus 0";
        add(report, "network.disconnected", msg);
      }
    }
  }
  return report;
}

ValidationReport validate(const NetworkModel& model, const DisturbanceSpec& d) {
  ValidationReport report;
  std::ostringstream where;
  where << to_string(d.kind) << " @" << d.target;
  if (!std::isfinite(d.t_onset) || d.t_onset < 0.0) {
    std::ostringstream msg;
    msg << where.str() << ": t_onset must be >= 0";
    add(report, "disturbance.t_onset", msg);
  }
  if (!std::isfinite(d.magnitude) || d.magnitude < 0.0) {
    std::ostringstream msg;
    msg << where.str() << ": magnitude must be >= 0";
    add(report, "disturbance.magnitude", msg);
  }
  if (d.kind == DisturbanceKind::Fault && !positive(d.duration)) {
    std::ostringstream msg;
    msg << where.str() << ": fault duration must be > 0";
    add(report, "disturbance.duration", msg);
  }
  if (d.targets_line()) {
    if (d.target < 0 || d.target >= model.line_count()) {
      std::ostringstream msg;
      msg << where.str() << ": no such line";
      add(report, "disturbance.target", msg);
    }
    return report;
  }
  if (d.target < 0 || d.target >= model.bus_count()) {
    std::ostringstream msg;
    msg << where.str() << ": no such bus";
    add(report, "disturbance.target", msg);
    return report;
  }
  const auto& bus = model.buses[d.target];
  if (d.kind == DisturbanceKind::GenerationTrip) {
    if (!bus.gen_rating) {
      std::ostringstream msg;
      msg << where.str() << ": target bus has no generator";
      add(report, "disturbance.no_generator", msg);
    } else if (d.magnitude > *bus.gen_rating) {
      std::ostringstream msg;
      msg << where.str() << ": magnitude " << d.magnitude << " MW exceeds gen_rating "
          << *bus.gen_rating << " MW";
      add(report, "disturbance.magnitude", msg);
    }
  }
  if (d.kind == DisturbanceKind::LoadShed && d.magnitude > bus.load_p) {
    std::ostringstream msg;
    msg << where.str() << ": magnitude " << d.magnitude << " MW exceeds load_p " << bus.load_p
        << " MW";
    add(report, "disturbance.magnitude", msg);
  }
  return report;
}

ValidationReport validate(const NetworkModel& model, const std::vector<DisturbanceSpec>& ds) {
  ValidationReport report;
  for (const auto& d : ds) {
    auto more = validate(model, d);
    report.insert(report.end(), more.begin(), more.end());
  }
  return report;
}

void require_valid(const ValidationReport& report, const std::string& context) {
  if (report.empty()) return;
  std::ostringstream msg;
  msg << context << ": " << report.size() << " violation(s)";
  for (const auto& v : report) msg << "\n  [" << v.code << "] " << v.message;
  throw Error(ErrorKind::Validation, msg.str());
}

NetworkModel build_ring(int n_buses, double line_km, const Bus& bus_template,
                        const Line& line_template, const SystemBases& bases) {
  if (n_buses < 3) {
    throw Error(ErrorKind::Topology,
                "ring needs at least 3 buses, got " + std::to_string(n_buses));
  }
  if (!(line_km > 0.0)) throw Error(ErrorKind::Topology, "ring line length must be > 0");

  NetworkModel model;
  model.bases = bases;
  // Chord between adjacent buses equals line_km.
  const double radius = line_km / (2.0 * std::sin(std::numbers::pi / n_buses));
  for (int k = 0; k < n_buses; ++k) {
    Bus bus = bus_template;
    bus.id = k;
    const double angle = 2.0 * std::numbers::pi * k / n_buses;
    bus.coord = {radius * std::cos(angle), radius * std::sin(angle)};
    model.buses.push_back(bus);
  }
  for (int k = 0; k < n_buses; ++k) {
    Line line = line_template;
    line.from_bus = k;
    line.to_bus = (k + 1) % n_buses;
    line.length = line_km;
    model.lines.push_back(line);
  }
  return model;
}

NetworkModel build_mesh(int rows, int cols, double spacing_km, const Bus& bus_template,
                        const Line& line_template, const SystemBases& bases) {
  if (rows < 2 || cols < 2) {
    throw Error(ErrorKind::Topology, "mesh needs rows >= 2 and cols >= 2, got " +
                                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!(spacing_km > 0.0)) throw Error(ErrorKind::Topology, "mesh spacing must be > 0");

  NetworkModel model;
  model.bases = bases;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Bus bus = bus_template;
      bus.id = id(r, c);
      bus.coord = {c * spacing_km, r * spacing_km};
      model.buses.push_back(bus);
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) {
        Line line = line_template;
        line.from_bus = id(r, c);
        line.to_bus = id(r, c + 1);
        line.length = spacing_km;
        model.lines.push_back(line);
      }
      if (r + 1 < rows) {
        Line line = line_template;
        line.from_bus = id(r, c);
        line.to_bus = id(r + 1, c);
        line.length = spacing_km;
        model.lines.push_back(line);
      }
    }
  }
  return model;
}

std::vector<double> path_distances(const NetworkModel& model, int origin,
                                   const std::vector<bool>& line_in_service) {
  const int n = model.bus_count();
  if (origin < 0 || origin >= n) {
    throw Error(ErrorKind::Topology, "origin bus " + std::to_string(origin) + " does not exist");
  }
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  const auto inc = model.incidence();
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[origin] = 0.0;
  heap.push({0.0, origin});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (int k : inc[u]) {
      if (!line_in_service.empty() && !line_in_service[k]) continue;
      const auto& line = model.lines[k];
      int v = line.from_bus == u ? line.to_bus : line.from_bus;
      double nd = d + line.length;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.push({nd, v});
      }
    }
  }
  return dist;
}

bool is_ring(const NetworkModel& model) {
  const int n = model.bus_count();
  if (n < 3 || model.line_count() != n) return false;
  for (int d : model.degrees()) {
    if (d != 2) return false;
  }
  const auto dist = path_distances(model, 0);
  return std::all_of(dist.begin(), dist.end(), [](double d) { return std::isfinite(d); });
}

}  // namespace transwave
