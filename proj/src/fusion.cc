#include "artmap/fusion.h"

#include <algorithm>
#include <cmath>

#include "artmap/error.h"

namespace artmap {

void FusionConfig::validate() const {
  if (!(0.0 < min_c && min_c < acc_c && acc_c < max_c)) {
    throw ConfigError("fusion distances must satisfy 0 < min_c < acc_c < max_c");
  }
}

std::string_view to_string(SensorMode mode) {
  switch (mode) {
    case SensorMode::kCamera:
      return "camera";
    case SensorMode::kLidar:
      return "lidar";
    case SensorMode::kFusion:
      return "fusion";
  }
  return "fusion";
}

SensorMode sensor_mode_from_string(std::string_view name) {
  if (name == "camera") return SensorMode::kCamera;
  if (name == "lidar") return SensorMode::kLidar;
  if (name == "fusion") return SensorMode::kFusion;
  throw ConfigError("unknown sensor mode '" + std::string(name) + "'");
}

std::string_view to_string(FusionBranch b) {
  switch (b) {
    case FusionBranch::kNone:
      return "none";
    case FusionBranch::kTooClose:
      return "too_close";
    case FusionBranch::kCamera:
      return "camera";
    case FusionBranch::kBlend:
      return "blend";
    case FusionBranch::kLidar:
      return "lidar";
    case FusionBranch::kOutOfRange:
      return "out_of_range";
  }
  return "none";
}

double fusion_weight(double dist_c, const FusionConfig& cfg) {
  if (!(dist_c >= cfg.acc_c && dist_c <= cfg.max_c)) {
    throw ContractViolation("fusion_weight needs acc_c <= dist_c <= max_c");
  }
  const double xi = -(dist_c - cfg.acc_c) / (cfg.max_c - cfg.acc_c) + 1.0;
  return std::clamp(xi, 0.0, 1.0);
}

namespace {

template <typename T>
Fused<T> gate(double dist, const std::optional<T>& cam,
              const std::optional<T>& lid, const FusionConfig& cfg) {
  Fused<T> out;
  out.distance = dist;
  if (!cam && !lid) return out;
  if (dist < cfg.min_c) {
    out.branch = FusionBranch::kTooClose;
    return out;
  }
  if (cam && lid) {
    if (dist <= cfg.acc_c) {
      out.value = *cam;
      out.branch = FusionBranch::kCamera;
      out.xi = 1.0;
    } else if (dist <= cfg.max_c) {
      const double xi = fusion_weight(dist, cfg);
      out.value = xi * *cam + (1.0 - xi) * *lid;
      out.branch = FusionBranch::kBlend;
      out.xi = xi;
    } else {
      out.value = *lid;
      out.branch = FusionBranch::kLidar;
    }
    return out;
  }
  if (cam) {
    if (dist <= cfg.max_c) {
      out.value = *cam;
      out.branch = FusionBranch::kCamera;
      out.xi = 1.0;
    } else {
      out.branch = FusionBranch::kOutOfRange;
    }
    return out;
  }
  out.value = *lid;
  out.branch = FusionBranch::kLidar;
  return out;
}

}  // namespace

Fused<Eigen::Vector3d> fuse_centroid_at(
    double dist_c, const std::optional<Eigen::Vector3d>& x_c,
    const std::optional<Eigen::Vector3d>& x_l, const FusionConfig& cfg) {
  return gate(dist_c, x_c, x_l, cfg);
}

Fused<Eigen::Vector3d> fuse_centroid(
    const std::optional<Eigen::Vector3d>& x_c,
    const std::optional<Eigen::Vector3d>& x_l, const FusionConfig& cfg) {
  double dist = 0.0;
  if (x_c) {
    dist = x_c->norm();
  } else if (x_l) {
    dist = x_l->norm();
  }
  return gate(dist, x_c, x_l, cfg);
}

Fused<double> fuse_radius(const std::optional<double>& rho_c,
                          const std::optional<double>& rho_l, double dist_c,
                          const FusionConfig& cfg) {
  return gate(dist_c, rho_c, rho_l, cfg);
}

double view_angle(const Point3& artifact_in_robot, const Pose2D5& robot_pose) {
  if (artifact_in_robot.frame != FrameId::kRobot) {
    throw FrameMismatchError("view_angle expects a robot-frame point");
  }
  const double xr = artifact_in_robot.x();
  const double yr = artifact_in_robot.y();
  if (xr == 0.0 && yr == 0.0) {
    throw UndefinedAngleError("artifact at the robot origin has no bearing");
  }
  const double heading =
      std::atan2(robot_pose.rotation(1, 0), robot_pose.rotation(0, 0));
  return normalize_angle(heading + std::atan2(yr, xr));
}

namespace {

void check_mask_dims(const BinaryMask& m, int width, int height) {
  if (m.width() != width || m.height() != height) {
    throw InputError("mask dimensions do not match the image");
  }
}

PointCloud filter_cloud(PointCloud cloud, const FilterParams& params) {
  if (params.downsample) cloud = voxel_downsample(cloud, params.voxel_leaf);
  return radius_outlier_removal(cloud, params);
}

}  // namespace

PointCloud camera_object_cloud(const DepthImage& depth,
                               const DetectionMask& mask,
                               const CameraIntrinsics& intr,
                               const FilterParams& params) {
  check_mask_dims(mask.mask, depth.width(), depth.height());
  if (depth.width() != intr.width || depth.height() != intr.height) {
    throw InputError("depth image does not match the camera intrinsics");
  }
  PointCloud cloud{FrameId::kCamera, {}};
  const PixelRect& roi = mask.mask.roi();
  for (int v = roi.v0; v < roi.v1; ++v) {
    for (int u = roi.u0; u < roi.u1; ++u) {
      if (!mask.mask.at(u, v)) continue;
      const uint16_t mm = depth.at(u, v);
      if (mm == 0) continue;
      cloud.points.push_back(
          back_project({static_cast<double>(u), static_cast<double>(v)},
                       mm * 1e-3, intr)
              .xyz);
    }
  }
  return filter_cloud(std::move(cloud), params);
}

namespace {

struct ProjectedPoint {
  uint32_t index;
  int u;
  int v;
};

std::vector<ProjectedPoint> project_all(const PointCloud& lidar,
                                        const Extrinsics& camera_from_lidar,
                                        const CameraIntrinsics& intr) {
  std::vector<ProjectedPoint> out;
  out.reserve(lidar.size() / 4);
  for (size_t i = 0; i < lidar.size(); ++i) {
    auto proj =
        project_camera_point(camera_from_lidar.apply(lidar.points[i]), intr);
    if (!proj) continue;
    out.push_back({static_cast<uint32_t>(i),
                   raster_index(proj->pixel.u, intr.width),
                   raster_index(proj->pixel.v, intr.height)});
  }
  return out;
}

PointCloud select_in_mask(const PointCloud& lidar,
                          const std::vector<ProjectedPoint>& projected,
                          const BinaryMask& mask) {
  PointCloud cloud{FrameId::kLidar, {}};
  for (const auto& p : projected) {
    if (mask.at(p.u, p.v)) cloud.points.push_back(lidar.points[p.index]);
  }
  return cloud;
}

}  // namespace

PointCloud lidar_object_cloud(const PointCloud& lidar,
                              const DetectionMask& mask,
                              const Extrinsics& camera_from_lidar,
                              const CameraIntrinsics& intr,
                              const FilterParams& params) {
  if (lidar.frame != FrameId::kLidar) {
    throw FrameMismatchError("lidar_object_cloud expects a lidar-frame cloud");
  }
  check_mask_dims(mask.mask, intr.width, intr.height);
  auto cloud =
      select_in_mask(lidar, project_all(lidar, camera_from_lidar, intr), mask.mask);
  return filter_cloud(std::move(cloud), params);
}

void PerceptionConfig::validate() const {
  fusion.validate();
  camera_filter.validate();
  lidar_filter.validate();
}

FrameEstimates estimate_artifacts(const Frame& frame, const Calibration& calib,
                                  const PerceptionConfig& cfg,
                                  const std::set<std::string>& allowed_classes) {
  FrameEstimates result;
  if (frame.masks.empty()) return result;

  const bool use_camera = cfg.mode != SensorMode::kLidar;
  const bool use_lidar = cfg.mode != SensorMode::kCamera;
  const CameraIntrinsics& intr = calib.camera;

  std::vector<ProjectedPoint> projected;
  if (use_lidar) projected = project_all(frame.lidar, calib.camera_from_lidar, intr);

  for (size_t i = 0; i < frame.masks.size(); ++i) {
    const DetectionMask& det = frame.masks[i];
    auto drop = [&](std::string reason) {
      result.dropped.push_back({i, det.class_label, std::move(reason)});
    };
    if (!allowed_classes.contains(det.class_label)) {
      drop("class_filtered");
      continue;
    }
    if (det.confidence < cfg.confidence_threshold) {
      drop("low_confidence");
      continue;
    }
    try {
      PointCloud cam_cloud{FrameId::kCamera, {}};
      PointCloud lid_cloud{FrameId::kLidar, {}};
      if (use_camera) {
        cam_cloud = camera_object_cloud(frame.depth, det, intr, cfg.camera_filter);
      }
      if (use_lidar) {
        check_mask_dims(det.mask, intr.width, intr.height);
        lid_cloud = filter_cloud(select_in_mask(frame.lidar, projected, det.mask),
                                 cfg.lidar_filter);
      }

      std::optional<Eigen::Vector3d> x_c, x_l;
      std::optional<double> rho_c, rho_l;
      if (!cam_cloud.empty()) {
        x_c = centroid(cam_cloud).xyz;
        rho_c = extent_radius(cam_cloud);
      }
      if (!lid_cloud.empty()) {
        x_l = calib.camera_from_lidar.apply(centroid(lid_cloud).xyz);
        rho_l = extent_radius(lid_cloud);
      }
      if (!x_c && !x_l) {
        drop("no_points");
        continue;
      }

      const auto fused = fuse_centroid(x_c, x_l, cfg.fusion);
      if (!fused.value) {
        drop(std::string(to_string(fused.branch)));
        continue;
      }
      const auto radius = fuse_radius(rho_c, rho_l, fused.distance, cfg.fusion);

      ArtifactEstimate est;
      est.class_label = det.class_label;
      est.confidence = det.confidence;
      const Point3 in_camera(*fused.value, FrameId::kCamera);
      est.centroid = to_map_frame(in_camera, calib.robot_from_camera,
                                  frame.robot_pose);
      est.radius = radius.value.value_or(0.0);
      const Point3 in_robot(calib.robot_from_camera.apply(*fused.value),
                            FrameId::kRobot);
      try {
        est.view_angle = view_angle(in_robot, frame.robot_pose);
      } catch (const UndefinedAngleError&) {
        est.view_angle = normalize_angle(frame.robot_pose.yaw());
      }
      if (x_c) est.camera_distance = x_c->norm();
      est.sources = {!cam_cloud.empty(), !lid_cloud.empty()};
      est.branch = fused.branch;
      result.estimates.push_back(std::move(est));
    } catch (const Error& e) {
      drop(std::string("error: ") + e.what());
    }
  }
  return result;
}

}  // namespace artmap
