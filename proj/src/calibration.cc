#include "artmap/calibration.h"

#include <fstream>

#include "artmap/error.h"

namespace artmap {

using nlohmann::json;

void Calibration::validate() const {
  camera.validate();
  camera_from_lidar.validate();
  robot_from_camera.validate();
  robot_from_lidar.validate();
}

bool Calibration::operator==(const Calibration& o) const {
  auto same = [](const Extrinsics& a, const Extrinsics& b) {
    return a.rotation == b.rotation && a.translation == b.translation;
  };
  return camera.fx == o.camera.fx && camera.fy == o.camera.fy &&
         camera.px == o.camera.px && camera.py == o.camera.py &&
         camera.width == o.camera.width && camera.height == o.camera.height &&
         same(camera_from_lidar, o.camera_from_lidar) &&
         same(robot_from_camera, o.robot_from_camera) &&
         same(robot_from_lidar, o.robot_from_lidar);
}

json to_json(const Extrinsics& e) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(e.rotation(r, c));
  }
  return {{"rotation", rot},
          {"translation",
           {e.translation.x(), e.translation.y(), e.translation.z()}}};
}

Extrinsics extrinsics_from_json(const json& j) {
  const auto& rot = j.at("rotation");
  const auto& t = j.at("translation");
  if (rot.size() != 9 || t.size() != 3) {
    throw ConfigError("extrinsics need 9 rotation and 3 translation values");
  }
  Extrinsics e;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) e.rotation(r, c) = rot.at(3 * r + c).get<double>();
  }
  e.translation = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
  return e;
}

json to_json(const Calibration& c) {
  return {{"camera",
           {{"fx", c.camera.fx},
            {"fy", c.camera.fy},
            {"px", c.camera.px},
            {"py", c.camera.py},
            {"width", c.camera.width},
            {"height", c.camera.height}}},
          {"camera_from_lidar", to_json(c.camera_from_lidar)},
          {"robot_from_camera", to_json(c.robot_from_camera)},
          {"robot_from_lidar", to_json(c.robot_from_lidar)}};
}

Calibration calibration_from_json(const json& j) {
  Calibration c;
  try {
    const auto& cam = j.at("camera");
    c.camera.fx = cam.at("fx").get<double>();
    c.camera.fy = cam.at("fy").get<double>();
    c.camera.px = cam.at("px").get<double>();
    c.camera.py = cam.at("py").get<double>();
    c.camera.width = cam.at("width").get<int>();
    c.camera.height = cam.at("height").get<int>();
    c.camera_from_lidar = extrinsics_from_json(j.at("camera_from_lidar"));
    c.robot_from_camera = extrinsics_from_json(j.at("robot_from_camera"));
    c.robot_from_lidar = extrinsics_from_json(j.at("robot_from_lidar"));
  } catch (const json::exception& e) {
    throw IngestionError(std::string("malformed calibration: ") + e.what());
  }
  c.validate();
  return c;
}

void save_calibration(const std::filesystem::path& path, const Calibration& c) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(c).dump(2) << '\n';
}

Calibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IngestionError("calibration is not valid JSON: " +
                         std::string(e.what()));
  }
  return calibration_from_json(j);
}

}  // namespace artmap
