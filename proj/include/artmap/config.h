#pragma once

#include <filesystem>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "artmap/evaluation.h"
#include "artmap/fusion.h"
#include "artmap/manager.h"
#include "artmap/simulator.h"

namespace artmap {

struct RunConfig {
  uint64_t seed = 1;
  // Wall-clock origin of the virtual clock, used for map timestamps.
  std::string clock_epoch = "1970-01-01T00:00:00Z";
  double replay_speed = 1.0;  // dataset timestamps are divided by this
  double goal_margin = 0.5;   // standoff beyond the artifact radius
};

struct PathsConfig {
  std::string dataset;
  std::string map;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  // Live loop: simulated seconds per wall-clock second (<= 0: unthrottled).
  double realtime_factor = 1.0;
  double robot_speed = 0.5;       // m/s while following waypoints
  double goal_tolerance = 0.05;   // m
};

struct PipelineConfig {
  PerceptionConfig perception;  // fusion gate, per-sensor filters, mode
  ManagerConfig manager;
  SensorModel sensors;
  std::set<std::string> classes;  // active allow-list
  SceneConfig scene;
  TrajectoryConfig trajectory;
  EvaluationConfig evaluation;
  RunConfig run;
  PathsConfig paths;
  ServiceConfig service;

  void validate() const;
};

// The bundled office-mini setup (scene, path and sensors).
PipelineConfig office_mini_config();

// Parses YAML over office-mini defaults. Unknown keys and invalid values
// throw ConfigError.
PipelineConfig parse_config(const std::string& yaml_text);
PipelineConfig load_config(const std::filesystem::path& path);

// Canonical JSON of every effective setting, and its FNV-1a digest.
nlohmann::json config_to_json(const PipelineConfig& cfg);
std::string config_digest(const PipelineConfig& cfg);

}  // namespace artmap
