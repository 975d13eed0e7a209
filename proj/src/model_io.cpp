#include "transwave/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "transwave/error.hpp"

namespace transwave {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Parse, msg); }

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  if (!obj.is_object()) fail(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!ok.count(item.key())) fail(where + ": unknown key '" + item.key() + "'");
  }
}

double get_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail(where + ": missing '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

double get_number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  return get_number(obj, key, where);
}

int get_int(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail(where + ": missing '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail(where + ": '" + key + "' must be an integer");
  return v.get<int>();
}

std::optional<double> get_optional(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get_number(obj, key, where);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const NetworkModel& model) {
  json doc;
  doc["bases"] = {{"s_base", model.bases.s_base},
                  {"v_base", model.bases.v_base},
                  {"f_nominal", model.bases.f_nominal}};
  json buses = json::array();
  for (const auto& b : model.buses) {
    buses.push_back({{"id", b.id},
                     {"coord", {b.coord.x, b.coord.y}},
                     {"gen_rating", optional_json(b.gen_rating)},
                     {"inertia_h", optional_json(b.inertia_h)},
                     {"coherent_count", b.coherent_count},
                     {"load_p", b.load_p},
                     {"emf_pu", b.emf_pu}});
  }
  json lines = json::array();
  for (const auto& l : model.lines) {
    lines.push_back({{"from_bus", l.from_bus},
                     {"to_bus", l.to_bus},
                     {"length", l.length},
                     {"r_per_len", l.r_per_len},
                     {"l_per_len", l.l_per_len},
                     {"c_per_len", l.c_per_len},
                     {"len_unit_em", to_string(l.len_unit_em)}});
  }
  doc["buses"] = std::move(buses);
  doc["lines"] = std::move(lines);
  return doc;
}

json to_json(const DisturbanceSpec& d) {
  json j{{"kind", to_string(d.kind)}, {"t_onset", d.t_onset}, {"magnitude", d.magnitude}};
  j[d.targets_line() ? "line" : "bus"] = d.target;
  if (d.kind == DisturbanceKind::Fault) j["duration"] = d.duration;
  return j;
}

json to_json(const std::vector<DisturbanceSpec>& ds) {
  json doc;
  doc["disturbances"] = json::array();
  for (const auto& d : ds) doc["disturbances"].push_back(to_json(d));
  return doc;
}

json to_json(const NetworkModel& model, const std::vector<DisturbanceSpec>& ds) {
  json doc = to_json(model);
  doc["disturbances"] = to_json(ds)["disturbances"];
  return doc;
}

DisturbanceSpec disturbance_from_json(const json& j) {
  const std::string where = "disturbance";
  reject_unknown(j, {"kind", "bus", "line", "t_onset", "magnitude", "duration"}, where);
  if (!j.contains("kind") || !j.at("kind").is_string()) fail(where + ": missing string 'kind'");
  auto kind = parse_disturbance_kind(j.at("kind").get<std::string>());
  if (!kind) fail(where + ": unknown kind '" + j.at("kind").get<std::string>() + "'");

  DisturbanceSpec d;
  d.kind = *kind;
  const char* target_key = d.targets_line() ? "line" : "bus";
  const char* other_key = d.targets_line() ? "bus" : "line";
  if (j.contains(other_key)) {
    fail(where + ": '" + other_key + "' is not valid for kind " + to_string(d.kind));
  }
  d.target = get_int(j, target_key, where);
  d.t_onset = get_number(j, "t_onset", where);
  const double default_magnitude =
      d.kind == DisturbanceKind::Fault ? DisturbanceSpec::kDefaultFaultResistance : 0.0;
  d.magnitude = get_number_or(j, "magnitude", default_magnitude, where);
  if (d.kind == DisturbanceKind::Fault) {
    d.duration = get_number_or(j, "duration", DisturbanceSpec::kDefaultFaultDuration, where);
  } else if (j.contains("duration")) {
    fail(where + ": 'duration' is only valid for faults");
  }
  return d;
}

ModelDocument document_from_json(const json& doc) {
  reject_unknown(doc, {"bases", "buses", "lines", "disturbances"}, "document");
  ModelDocument out;
  const bool any_network = doc.contains("bases") || doc.contains("buses") || doc.contains("lines");
  if (any_network) {
    if (!doc.contains("buses") || !doc.contains("lines")) {
      fail("document: a network needs both 'buses' and 'lines'");
    }
    out.has_network = true;
    auto& model = out.network;
    if (doc.contains("bases")) {
      const auto& b = doc.at("bases");
      reject_unknown(b, {"s_base", "v_base", "f_nominal"}, "bases");
      model.bases.s_base = get_number(b, "s_base", "bases");
      model.bases.v_base = get_number(b, "v_base", "bases");
      model.bases.f_nominal = get_number(b, "f_nominal", "bases");
    }
    if (!doc.at("buses").is_array()) fail("document: 'buses' must be an array");
    for (std::size_t k = 0; k < doc.at("buses").size(); ++k) {
      const auto& j = doc.at("buses")[k];
      const std::string where = "buses[" + std::to_string(k) + "]";
      reject_unknown(j, {"id", "coord", "gen_rating", "inertia_h", "coherent_count", "load_p",
                         "emf_pu"},
                     where);
      Bus bus;
      bus.id = get_int(j, "id", where);
      if (j.contains("coord")) {
        const auto& c = j.at("coord");
        if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
          fail(where + ": 'coord' must be [x_km, y_km]");
        }
        bus.coord = {c[0].get<double>(), c[1].get<double>()};
      }
      bus.gen_rating = get_optional(j, "gen_rating", where);
      bus.inertia_h = get_optional(j, "inertia_h", where);
      bus.coherent_count = j.contains("coherent_count") ? get_int(j, "coherent_count", where) : 1;
      bus.load_p = get_number_or(j, "load_p", 0.0, where);
      bus.emf_pu = get_number_or(j, "emf_pu", 1.0, where);
      model.buses.push_back(bus);
    }
    if (!doc.at("lines").is_array()) fail("document: 'lines' must be an array");
    for (std::size_t k = 0; k < doc.at("lines").size(); ++k) {
      const auto& j = doc.at("lines")[k];
      const std::string where = "lines[" + std::to_string(k) + "]";
      reject_unknown(j, {"from_bus", "to_bus", "length", "r_per_len", "l_per_len", "c_per_len",
                         "len_unit_em"},
                     where);
      Line line;
      line.from_bus = get_int(j, "from_bus", where);
      line.to_bus = get_int(j, "to_bus", where);
      line.length = get_number(j, "length", where);
      line.r_per_len = get_number(j, "r_per_len", where);
      line.l_per_len = get_number(j, "l_per_len", where);
      line.c_per_len = get_number(j, "c_per_len", where);
      if (j.contains("len_unit_em")) {
        const auto& u = j.at("len_unit_em");
        if (u == "m") {
          line.len_unit_em = LengthUnit::Meter;
        } else if (u == "km") {
          line.len_unit_em = LengthUnit::Kilometer;
        } else {
          fail(where + ": 'len_unit_em' must be \"m\" or \"km\"");
        }
      }
      model.lines.push_back(line);
    }
  }
  if (doc.contains("disturbances")) {
    const auto& arr = doc.at("disturbances");
    if (!arr.is_array()) fail("document: 'disturbances' must be an array");
    for (const auto& j : arr) out.disturbances.push_back(disturbance_from_json(j));
  }
  return out;
}

ModelDocument parse_document(const std::string& text, const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line/column.
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << source_name << ":" << line << ":" << col << ": malformed JSON";
    throw Error(ErrorKind::Parse, msg.str());
  }
  try {
    return document_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.kind(), source_name + ": " + e.what());
  }
}

ModelDocument read_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str(), path.string());
}

NetworkModel read_network(const std::filesystem::path& path) {
  auto doc = read_document(path);
  if (!doc.has_network) throw Error(ErrorKind::Parse, path.string() + ": no network defined");
  return doc.network;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Configuration, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace transwave
