#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "artmap/manager.h"

namespace artmap {

// YAML artifact map. Numbers carry 6 decimals; the document ends with the
// YAML end marker so a truncated file is detected on load.
std::string map_to_yaml(const ArtifactMap& map);
ArtifactMap map_from_yaml(const std::string& text);

void save_map(const std::filesystem::path& path, const ArtifactMap& map);
// Throws ParseError (with a line number when available); never returns a
// partially read map.
ArtifactMap load_map(const std::filesystem::path& path);

// JSON with the same fields as the YAML schema.
nlohmann::json map_to_json(const ArtifactMap& map);
nlohmann::json artifact_to_json(const MapArtifact& a);

}  // namespace artmap
