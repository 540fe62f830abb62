#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "artmap/calibration.h"
#include "artmap/cloud_filters.h"
#include "artmap/frame.h"

namespace artmap {

// Distance thresholds of the depth camera, in meters.
struct FusionConfig {
  double min_c = 0.3;
  double acc_c = 4.0;
  double max_c = 6.0;

  void validate() const;
};

enum class SensorMode { kCamera, kLidar, kFusion };
std::string_view to_string(SensorMode mode);
SensorMode sensor_mode_from_string(std::string_view name);

// Which rule of the distance gate produced a fused value.
enum class FusionBranch {
  kNone,          // neither sensor produced an estimate
  kTooClose,      // below min_c: detection discarded
  kCamera,        // camera alone within its accurate range
  kBlend,         // xi-weighted blend between acc_c and max_c
  kLidar,         // lidar beyond max_c, or lidar is the only sensor
  kOutOfRange,    // camera only, beyond max_c: discarded
};
std::string_view to_string(FusionBranch b);

template <typename T>
struct Fused {
  std::optional<T> value;
  FusionBranch branch = FusionBranch::kNone;
  double xi = 0.0;        // camera weight actually applied
  double distance = 0.0;  // dist_C used for gating
};

// Camera weight on [acc_c, max_c]: 1 at acc_c, 0 at max_c, linear between.
// Throws ContractViolation outside that interval.
double fusion_weight(double dist_c, const FusionConfig& cfg);

// dist_C is |X_C| when the camera estimate exists, else |X_L|. Both points in
// the camera frame.
Fused<Eigen::Vector3d> fuse_centroid(
    const std::optional<Eigen::Vector3d>& x_c,
    const std::optional<Eigen::Vector3d>& x_l, const FusionConfig& cfg);

// Same gate with an externally supplied distance.
Fused<Eigen::Vector3d> fuse_centroid_at(
    double dist_c, const std::optional<Eigen::Vector3d>& x_c,
    const std::optional<Eigen::Vector3d>& x_l, const FusionConfig& cfg);

Fused<double> fuse_radius(const std::optional<double>& rho_c,
                          const std::optional<double>& rho_l, double dist_c,
                          const FusionConfig& cfg);

// atan2(r21, r11) + atan2(y_r, x_r), wrapped to (-pi, pi].
double view_angle(const Point3& artifact_in_robot, const Pose2D5& robot_pose);

// Back-projects masked pixels with valid depth, then voxel and radius filters.
PointCloud camera_object_cloud(const DepthImage& depth,
                               const DetectionMask& mask,
                               const CameraIntrinsics& intr,
                               const FilterParams& params);

// Lidar points whose projection lands on a set mask pixel, radius filtered.
PointCloud lidar_object_cloud(const PointCloud& lidar,
                              const DetectionMask& mask,
                              const Extrinsics& camera_from_lidar,
                              const CameraIntrinsics& intr,
                              const FilterParams& params);

struct SourceFlags {
  bool camera = false;
  bool lidar = false;
  bool any() const { return camera || lidar; }
  bool operator==(const SourceFlags&) const = default;
};

struct ArtifactEstimate {
  std::string class_label;
  double confidence = 1.0;
  Point3 centroid{0, 0, 0, FrameId::kMap};
  double radius = 0.0;
  double view_angle = 0.0;
  std::optional<double> camera_distance;
  SourceFlags sources;
  FusionBranch branch = FusionBranch::kNone;
};

struct PerceptionConfig {
  FusionConfig fusion;
  FilterParams camera_filter;
  FilterParams lidar_filter{0.05, 0.3, 0.10, 2, false};
  SensorMode mode = SensorMode::kFusion;
  double confidence_threshold = 0.0;

  void validate() const;
};

struct DroppedDetection {
  size_t mask_index = 0;
  std::string class_label;
  std::string reason;
};

struct FrameEstimates {
  std::vector<ArtifactEstimate> estimates;
  std::vector<DroppedDetection> dropped;
};

// Runs the per-mask pipeline on one frame. Masks whose class is not in
// allowed_classes are dropped (an empty set allows nothing). Never throws for
// per-mask problems; those end up in `dropped`.
FrameEstimates estimate_artifacts(const Frame& frame, const Calibration& calib,
                                  const PerceptionConfig& cfg,
                                  const std::set<std::string>& allowed_classes);

}  // namespace artmap
