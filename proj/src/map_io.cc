#include "artmap/map_io.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "artmap/error.h"

namespace artmap {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  // Avoid "-0.000000" so identical maps always serialize identically.
  if (std::string(buf) == "-0.000000") return "0.000000";
  return buf;
}

std::string scalar(const std::string& s) {
  static const std::regex plain("[A-Za-z0-9_][A-Za-z0-9_ .-]*");
  if (std::regex_match(s, plain) && s.back() != ' ' && s != "null" &&
      s != "true" && s != "false" && s != "yes" && s != "no") {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string map_to_yaml(const ArtifactMap& map) {
  std::ostringstream os;
  os << "meta: {run_id: " << scalar(map.meta.run_id) << ", created: \""
     << map.meta.created << "\", config_digest: " << scalar(map.meta.config_digest)
     << "}\n";
  if (map.artifacts.empty()) {
    os << "artifacts: []\n";
  } else {
    os << "artifacts:\n";
    for (const auto& a : map.artifacts) {
      os << "  - id: " << a.id << "\n"
         << "    class: " << scalar(a.class_label) << "\n"
         << "    position: {x: " << fixed6(a.position.x())
         << ", y: " << fixed6(a.position.y()) << ", z: " << fixed6(a.position.z())
         << "}\n"
         << "    radius: " << fixed6(a.radius) << "\n"
         << "    view_angle: " << fixed6(a.view_angle) << "\n"
         << "    observations: " << a.observations << "\n";
    }
  }
  os << "...\n";
  return os.str();
}

ArtifactMap map_from_yaml(const std::string& text) {
  // The end marker must be the last non-empty line.
  std::string_view body(text);
  while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) {
    body.remove_suffix(1);
  }
  const auto nl = body.rfind('\n');
  const std::string_view last = nl == std::string_view::npos ? body : body.substr(nl + 1);
  if (last != "...") {
    const int lines = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
    throw ParseError("map file is truncated: missing '...' end marker", lines);
  }
  ArtifactMap map;
  try {
    YAML::Node root = YAML::Load(text);
    if (!root.IsMap()) throw ParseError("map root must be a mapping", 1);
    const YAML::Node meta = root["meta"];
    const YAML::Node arts = root["artifacts"];
    if (!meta || !meta.IsMap()) throw ParseError("missing 'meta' mapping", 1);
    if (!arts || !arts.IsSequence()) {
      throw ParseError("missing 'artifacts' sequence", 1);
    }
    map.meta.run_id = meta["run_id"].as<std::string>();
    map.meta.created = meta["created"].as<std::string>();
    map.meta.config_digest = meta["config_digest"].as<std::string>();
    for (const auto& node : arts) {
      const int line = node.Mark().line + 1;
      auto need = [&](const char* key) {
        YAML::Node v = node[key];
        if (!v) throw ParseError(std::string("artifact missing '") + key + "'", line);
        return v;
      };
      MapArtifact a;
      a.id = need("id").as<int>();
      a.class_label = need("class").as<std::string>();
      YAML::Node pos = need("position");
      a.position = {pos["x"].as<double>(), pos["y"].as<double>(),
                    pos["z"].as<double>()};
      a.radius = need("radius").as<double>();
      a.view_angle = need("view_angle").as<double>();
      a.observations = need("observations").as<int>();
      map.artifacts.push_back(std::move(a));
    }
  } catch (const YAML::Exception& e) {
    throw ParseError("invalid map YAML: " + e.msg,
                     e.mark.is_null() ? -1 : e.mark.line + 1);
  }
  return map;
}

void save_map(const std::filesystem::path& path, const ArtifactMap& map) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp);
    out << map_to_yaml(map);
    if (!out) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

ArtifactMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), -1);
  std::stringstream ss;
  ss << in.rdbuf();
  return map_from_yaml(ss.str());
}

nlohmann::json artifact_to_json(const MapArtifact& a) {
  return {{"id", a.id},
          {"class", a.class_label},
          {"position", {{"x", a.position.x()}, {"y", a.position.y()}, {"z", a.position.z()}}},
          {"radius", a.radius},
          {"view_angle", a.view_angle},
          {"observations", a.observations}};
}

nlohmann::json map_to_json(const ArtifactMap& map) {
  nlohmann::json arts = nlohmann::json::array();
  for (const auto& a : map.artifacts) arts.push_back(artifact_to_json(a));
  return {{"meta",
           {{"run_id", map.meta.run_id},
            {"created", map.meta.created},
            {"config_digest", map.meta.config_digest}}},
          {"artifacts", arts}};
}

}  // namespace artmap
