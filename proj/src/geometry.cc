#include "artmap/geometry.h"

#include <cmath>
#include <numbers>

#include "artmap/error.h"

namespace artmap {

std::string_view to_string(FrameId frame) {
  switch (frame) {
    case FrameId::kCamera:
      return "camera";
    case FrameId::kLidar:
      return "lidar";
    case FrameId::kMap:
      return "map";
    case FrameId::kRobot:
      return "robot";
  }
  return "unknown";
}

FrameId frame_from_string(std::string_view name) {
  if (name == "camera") return FrameId::kCamera;
  if (name == "lidar") return FrameId::kLidar;
  if (name == "map") return FrameId::kMap;
  if (name == "robot") return FrameId::kRobot;
  throw FrameMismatchError("unknown frame tag '" + std::string(name) + "'");
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ContractViolation("camera focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw ContractViolation("camera image size must be positive");
  }
  if (!(px >= 0.0 && px < width && py >= 0.0 && py < height)) {
    throw ContractViolation("principal point outside the image");
  }
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  return ortho < tol && std::abs(r.determinant() - 1.0) < tol;
}

Extrinsics Extrinsics::from_yaw(double yaw, const Eigen::Vector3d& t) {
  Extrinsics e;
  e.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  e.translation = t;
  return e;
}

void Extrinsics::validate() const {
  if (!is_rotation(rotation)) {
    throw ContractViolation("extrinsic rotation is not a proper rotation");
  }
  if (!translation.allFinite()) {
    throw ContractViolation("extrinsic translation is not finite");
  }
}

Extrinsics Extrinsics::inverse() const {
  Extrinsics inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Extrinsics Extrinsics::compose(const Extrinsics& inner) const {
  Extrinsics out;
  out.rotation = rotation * inner.rotation;
  out.translation = rotation * inner.translation + translation;
  return out;
}

Pose2D5 Pose2D5::from_xy_yaw(double x, double y, double yaw, double z) {
  Pose2D5 p;
  p.position = Eigen::Vector3d(x, y, z);
  p.rotation =
      Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return p;
}

double Pose2D5::yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

void Pose2D5::validate() const {
  if (!is_rotation(rotation)) {
    throw ContractViolation("pose rotation is not a proper rotation");
  }
}

Point3 back_project(const PixelCoord& pixel, double depth,
                    const CameraIntrinsics& intr) {
  if (!(depth > 0.0)) {
    throw InvalidDepthError("depth must be positive (got " +
                            std::to_string(depth) + ")");
  }
  if (!intr.contains(pixel)) {
    throw ContractViolation("pixel outside image bounds");
  }
  const double x = (pixel.u - intr.px) / intr.fx * depth;
  const double y = (pixel.v - intr.py) / intr.fy * depth;
  return Point3(x, y, depth, FrameId::kCamera);
}

std::optional<Projection> project_camera_point(const Eigen::Vector3d& p_cam,
                                               const CameraIntrinsics& intr) {
  const double z = p_cam.z();
  if (!(z > 0.0)) return std::nullopt;
  PixelCoord px{intr.fx * p_cam.x() / z + intr.px,
                intr.fy * p_cam.y() / z + intr.py};
  if (!intr.contains(px)) return std::nullopt;
  return Projection{px, z};
}

std::optional<Projection> project_to_image(const Point3& point,
                                           const Extrinsics& camera_from_lidar,
                                           const CameraIntrinsics& intr) {
  if (point.frame != FrameId::kLidar) {
    throw FrameMismatchError("project_to_image expects a lidar-frame point");
  }
  return project_camera_point(camera_from_lidar.apply(point.xyz), intr);
}

Point3 to_map_frame(const Point3& point, const Extrinsics& robot_from_sensor,
                    const Pose2D5& robot_pose) {
  Eigen::Vector3d in_robot;
  switch (point.frame) {
    case FrameId::kCamera:
    case FrameId::kLidar:
      in_robot = robot_from_sensor.apply(point.xyz);
      break;
    case FrameId::kRobot:
      in_robot = point.xyz;
      break;
    default:
      throw FrameMismatchError("to_map_frame expects a sensor or robot frame "
                               "point, got " +
                               std::string(to_string(point.frame)));
  }
  return Point3(robot_pose.rotation * in_robot + robot_pose.position,
                FrameId::kMap);
}

double normalize_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

}  // namespace artmap
