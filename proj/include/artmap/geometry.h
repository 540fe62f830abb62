#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace artmap {

enum class FrameId { kCamera, kLidar, kMap, kRobot };

std::string_view to_string(FrameId frame);
FrameId frame_from_string(std::string_view name);

struct Point3 {
  Eigen::Vector3d xyz = Eigen::Vector3d::Zero();
  FrameId frame = FrameId::kCamera;

  Point3() = default;
  Point3(double x, double y, double z, FrameId f) : xyz(x, y, z), frame(f) {}
  Point3(const Eigen::Vector3d& v, FrameId f) : xyz(v), frame(f) {}

  double x() const { return xyz.x(); }
  double y() const { return xyz.y(); }
  double z() const { return xyz.z(); }
};

// Continuous image coordinates: u is the column, v the row, origin top-left.
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double px = 0.0;
  double py = 0.0;
  int width = 0;
  int height = 0;

  // Throws ContractViolation if the invariants do not hold.
  void validate() const;
  bool contains(const PixelCoord& p) const {
    return p.u >= 0.0 && p.u < width && p.v >= 0.0 && p.v < height;
  }
};

// Rigid transform p_target = rotation * p_source + translation.
struct Extrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Extrinsics identity() { return {}; }
  static Extrinsics from_yaw(double yaw, const Eigen::Vector3d& t);

  void validate() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
  Extrinsics inverse() const;
  // (*this) ∘ inner: first inner, then this.
  Extrinsics compose(const Extrinsics& inner) const;
};

// Robot pose in the map frame. rotation is map <- robot.
struct Pose2D5 {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  static Pose2D5 from_xy_yaw(double x, double y, double yaw, double z = 0.0);
  double yaw() const;
  void validate() const;
  Extrinsics as_transform() const { return {rotation, position}; }
};

// True iff R is orthonormal with determinant +1 within tol.
bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-9);

// Lifts a pixel with metric depth into the camera frame. Depth must be > 0;
// zero depth is the missing-measurement sentinel and raises InvalidDepthError.
Point3 back_project(const PixelCoord& pixel, double depth,
                    const CameraIntrinsics& intr);

struct Projection {
  PixelCoord pixel;
  double depth = 0.0;  // camera-frame z
};

// Projects a lidar-frame point through camera_from_lidar and the pinhole
// model. Absent when the point is behind the image plane or out of bounds.
std::optional<Projection> project_to_image(const Point3& point,
                                           const Extrinsics& camera_from_lidar,
                                           const CameraIntrinsics& intr);

// Same as above for a point already in the camera frame.
std::optional<Projection> project_camera_point(const Eigen::Vector3d& p_cam,
                                               const CameraIntrinsics& intr);

// Nearest-integer raster index for a continuous coordinate in [0, size).
inline int raster_index(double c, int size) {
  int i = static_cast<int>(c + 0.5);
  return i >= size ? size - 1 : i;
}

// Sensor point -> map frame via robot_from_sensor and the robot pose.
Point3 to_map_frame(const Point3& point, const Extrinsics& robot_from_sensor,
                    const Pose2D5& robot_pose);

// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

}  // namespace artmap
