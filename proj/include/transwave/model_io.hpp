#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "transwave/core_model.hpp"

namespace transwave {

/// Contents of a network/scenario JSON document. Every top-level key is optional;
/// a network file carries bases/buses/lines, a scenario file carries disturbances.
struct ModelDocument {
  bool has_network = false;
  NetworkModel network;
  std::vector<DisturbanceSpec> disturbances;
};

nlohmann::json to_json(const NetworkModel& model);
nlohmann::json to_json(const DisturbanceSpec& d);
nlohmann::json to_json(const NetworkModel& model, const std::vector<DisturbanceSpec>& ds);
nlohmann::json to_json(const std::vector<DisturbanceSpec>& ds);

/// Strict decoding: unknown keys and wrong types raise Error(Parse).
ModelDocument document_from_json(const nlohmann::json& doc);
DisturbanceSpec disturbance_from_json(const nlohmann::json& j);

/// Parses text; syntax errors are reported as Error(Parse) with line and column.
ModelDocument parse_document(const std::string& text, const std::string& source_name = "<input>");
ModelDocument read_document(const std::filesystem::path& path);

/// Reads a file that must define a network.
NetworkModel read_network(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace transwave
