#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "artmap/geometry.h"

namespace artmap {

// Contents of calib.json.
struct Calibration {
  CameraIntrinsics camera;
  Extrinsics camera_from_lidar;
  Extrinsics robot_from_camera;
  Extrinsics robot_from_lidar;

  void validate() const;
  bool operator==(const Calibration& o) const;
};

nlohmann::json to_json(const Extrinsics& e);
Extrinsics extrinsics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Calibration& c);
Calibration calibration_from_json(const nlohmann::json& j);

void save_calibration(const std::filesystem::path& path, const Calibration& c);
Calibration load_calibration(const std::filesystem::path& path);

}  // namespace artmap
