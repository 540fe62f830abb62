#include "artmap/simulator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "artmap/error.h"

namespace artmap {

namespace {

constexpr double kEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::kSphere:
      return "sphere";
    case Shape::kBox:
      return "box";
    case Shape::kCylinder:
      return "cylinder";
  }
  return "sphere";
}

Shape shape_from_string(std::string_view name) {
  if (name == "sphere") return Shape::kSphere;
  if (name == "box") return Shape::kBox;
  if (name == "cylinder") return Shape::kCylinder;
  throw ConfigError("unknown shape '" + std::string(name) + "'");
}

double bounding_radius(Shape shape, const Eigen::Vector3d& d) {
  switch (shape) {
    case Shape::kSphere:
      return 0.5 * d.x();
    case Shape::kBox:
      return 0.5 * d.norm();
    case Shape::kCylinder:
      return std::hypot(0.5 * d.x(), 0.5 * d.z());
  }
  return 0.0;
}

namespace {

// Radius of the object's footprint on the floor plane.
double footprint_radius(Shape shape, const Eigen::Vector3d& d) {
  if (shape == Shape::kBox) return 0.5 * std::hypot(d.x(), d.y());
  return 0.5 * d.x();
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

}  // namespace

void SceneConfig::validate() const {
  if (!(arena_x > 0.0 && arena_y > 0.0)) {
    throw ConfigError("arena dimensions must be positive");
  }
  if (object_count < 0) throw ConfigError("object_count must be >= 0");
  if (object_count > 0 && classes.empty()) {
    throw ConfigError("scene needs at least one object class");
  }
  for (const auto& c : classes) {
    if (!(c.dimensions.minCoeff() > 0.0)) {
      throw ConfigError("object dimensions must be positive for class " + c.label);
    }
  }
}

std::vector<std::string> Scene::class_labels() const {
  std::vector<std::string> labels;
  for (const auto& c : config.classes) labels.push_back(c.label);
  return labels;
}

Scene generate_scene(const SceneConfig& config, uint64_t seed) {
  config.validate();
  Scene scene;
  scene.config = config;
  std::mt19937_64 rng(mix_seed(seed, 0x5ce7e));
  std::uniform_int_distribution<size_t> pick_class(
      0, config.classes.empty() ? 0 : config.classes.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int i = 0; i < config.object_count; ++i) {
    const ObjectClassSpec& spec = config.classes[pick_class(rng)];
    SceneObject obj;
    obj.id = i;
    obj.class_label = spec.label;
    obj.shape = spec.shape;
    obj.dimensions = spec.dimensions;
    obj.ground_truth_radius = bounding_radius(spec.shape, spec.dimensions);
    const double foot = footprint_radius(spec.shape, spec.dimensions);
    const double hx = 0.5 * config.arena_x - config.wall_margin - foot;
    const double hy = 0.5 * config.arena_y - config.wall_margin - foot;
    if (hx <= 0.0 || hy <= 0.0) {
      throw PlacementError("arena too small for class " + spec.label);
    }
    bool placed = false;
    for (int attempt = 0; attempt < config.max_attempts && !placed; ++attempt) {
      const Eigen::Vector2d xy(-hx + 2.0 * hx * unit(rng), -hy + 2.0 * hy * unit(rng));
      const double yaw = spec.shape == Shape::kBox ? std::numbers::pi * unit(rng) : 0.0;
      bool ok = true;
      for (const auto& other : scene.objects) {
        const double need =
            obj.ground_truth_radius + other.ground_truth_radius + config.min_gap;
        if ((other.center.head<2>() - xy).norm() < need) {
          ok = false;
          break;
        }
      }
      for (size_t k = 0; ok && k + 1 < config.keep_out_path.size(); ++k) {
        if (point_segment_distance(xy, config.keep_out_path[k],
                                   config.keep_out_path[k + 1]) <
            foot + config.path_clearance) {
          ok = false;
        }
      }
      if (!ok) continue;
      obj.center = Eigen::Vector3d(xy.x(), xy.y(), 0.5 * spec.dimensions.z());
      obj.yaw = yaw;
      placed = true;
    }
    if (!placed) {
      throw PlacementError("could not place object " + std::to_string(i) +
                           " after " + std::to_string(config.max_attempts) +
                           " attempts");
    }
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  // splitmix64 finalizer over the combined value
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Ray casting

namespace {

double hit_sphere(const Eigen::Vector3d& c, double r, const Eigen::Vector3d& o,
                  const Eigen::Vector3d& d) {
  const Eigen::Vector3d oc = o - c;
  const double a = d.squaredNorm();
  const double b = 2.0 * oc.dot(d);
  const double cc = oc.squaredNorm() - r * r;
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0) return kInf;
  const double s = std::sqrt(disc);
  const double t0 = (-b - s) / (2.0 * a);
  if (t0 > kEps) return t0;
  const double t1 = (-b + s) / (2.0 * a);
  return t1 > kEps ? t1 : kInf;
}

double hit_box(const SceneObject& obj, const Eigen::Vector3d& o,
               const Eigen::Vector3d& d) {
  const double cy = std::cos(-obj.yaw), sy = std::sin(-obj.yaw);
  const Eigen::Vector3d rel = o - obj.center;
  const Eigen::Vector3d lo(cy * rel.x() - sy * rel.y(), sy * rel.x() + cy * rel.y(),
                           rel.z());
  const Eigen::Vector3d ld(cy * d.x() - sy * d.y(), sy * d.x() + cy * d.y(), d.z());
  const Eigen::Vector3d h = 0.5 * obj.dimensions;
  double tmin = -kInf, tmax = kInf;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(ld[i]) < 1e-15) {
      if (lo[i] < -h[i] || lo[i] > h[i]) return kInf;
      continue;
    }
    double t1 = (-h[i] - lo[i]) / ld[i];
    double t2 = (h[i] - lo[i]) / ld[i];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return kInf;
  }
  if (tmax <= kEps) return kInf;
  return tmin > kEps ? tmin : tmax;
}

double hit_cylinder(const SceneObject& obj, const Eigen::Vector3d& o,
                    const Eigen::Vector3d& d) {
  const double r = 0.5 * obj.dimensions.x();
  const double hh = 0.5 * obj.dimensions.z();
  const Eigen::Vector3d l = o - obj.center;
  double best = kInf;
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-18) {
    const double b = 2.0 * (l.x() * d.x() + l.y() * d.y());
    const double c = l.x() * l.x() + l.y() * l.y() - r * r;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      for (double t : {(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)}) {
        if (t > kEps && t < best && std::abs(l.z() + t * d.z()) <= hh) best = t;
      }
    }
  }
  if (std::abs(d.z()) > 1e-18) {
    for (double zc : {-hh, hh}) {
      const double t = (zc - l.z()) / d.z();
      if (t <= kEps || t >= best) continue;
      const double x = l.x() + t * d.x(), y = l.y() + t * d.y();
      if (x * x + y * y <= r * r) best = t;
    }
  }
  return best;
}

double hit_object(const SceneObject& obj, const Eigen::Vector3d& o,
                  const Eigen::Vector3d& d) {
  switch (obj.shape) {
    case Shape::kSphere:
      return hit_sphere(obj.center, 0.5 * obj.dimensions.x(), o, d);
    case Shape::kBox:
      return hit_box(obj, o, d);
    case Shape::kCylinder:
      return hit_cylinder(obj, o, d);
  }
  return kInf;
}

bool ray_misses_sphere(const Eigen::Vector3d& c, double r,
                       const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  const Eigen::Vector3d oc = c - o;
  const double proj = oc.dot(d);
  const double dist2 = oc.squaredNorm() - proj * proj / d.squaredNorm();
  if (dist2 > r * r) return true;
  return proj < 0.0 && oc.squaredNorm() > r * r;
}

double hit_structure(const SceneConfig& cfg, const Eigen::Vector3d& o,
                     const Eigen::Vector3d& d) {
  double best = kInf;
  const double hx = 0.5 * cfg.arena_x, hy = 0.5 * cfg.arena_y;
  if (cfg.floor && d.z() < 0.0 && o.z() > 0.0) {
    const double t = -o.z() / d.z();
    const double x = o.x() + t * d.x(), y = o.y() + t * d.y();
    if (std::abs(x) <= hx && std::abs(y) <= hy) best = t;
  }
  if (cfg.walls) {
    auto wall = [&](int axis, double plane) {
      if (std::abs(d[axis]) < 1e-18) return;
      const double t = (plane - o[axis]) / d[axis];
      if (t <= kEps || t >= best) return;
      const Eigen::Vector3d p = o + t * d;
      const int other = axis == 0 ? 1 : 0;
      const double lim = other == 0 ? hx : hy;
      if (p.z() >= 0.0 && p.z() <= cfg.wall_height && std::abs(p[other]) <= lim) {
        best = t;
      }
    };
    wall(0, d.x() > 0 ? hx : -hx);
    wall(1, d.y() > 0 ? hy : -hy);
  }
  return best;
}

}  // namespace

std::optional<RayHit> cast_ray(const Scene& scene, const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& dir) {
  double best = hit_structure(scene.config, origin, dir);
  int who = -1;
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& obj = scene.objects[i];
    if (ray_misses_sphere(obj.center, obj.ground_truth_radius + 1e-6, origin, dir)) {
      continue;
    }
    const double t = hit_object(obj, origin, dir);
    if (t < best) {
      best = t;
      who = static_cast<int>(i);
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return RayHit{best, who};
}

// ---------------------------------------------------------------------------
// Sensors

SensorModel::SensorModel() {
  // Camera looking along robot +x, 0.2 m ahead of the base at 0.5 m height.
  camera.robot_from_camera.rotation << 0, 0, 1, -1, 0, 0, 0, -1, 0;
  camera.robot_from_camera.translation = {0.2, 0.0, 0.5};
  lidar.robot_from_lidar.translation = {0.0, 0.0, 0.7};
}

void SensorModel::validate() const {
  camera.intrinsics.validate();
  camera.robot_from_camera.validate();
  lidar.robot_from_lidar.validate();
  if (camera.noise_a < 0.0) throw ConfigError("camera noise_a must be >= 0");
  if (camera.dropout < 0.0 || camera.dropout > 1.0) {
    throw ConfigError("camera dropout must lie in [0, 1]");
  }
  if (!(camera.max_range > camera.min_range && camera.min_range >= 0.0)) {
    throw ConfigError("camera range must satisfy 0 <= min < max");
  }
  if (lidar.rings < 1) throw ConfigError("lidar rings must be >= 1");
  if (lidar.range_noise < 0.0) throw ConfigError("lidar range_noise must be >= 0");
  if (!(lidar.horizontal_resolution > 0.0)) {
    throw ConfigError("lidar horizontal_resolution must be positive");
  }
  if (!(lidar.max_range > 0.0)) throw ConfigError("lidar max_range must be positive");
  if (masks.erosion < 0 || masks.min_pixels < 1) {
    throw ConfigError("mask erosion must be >= 0 and min_pixels >= 1");
  }
  if (masks.label_swap < 0.0 || masks.label_swap > 1.0) {
    throw ConfigError("mask label_swap must lie in [0, 1]");
  }
  if (pose_noise < 0.0) throw ConfigError("pose_noise must be >= 0");
}

Calibration SensorModel::calibration() const {
  Calibration c;
  c.camera = camera.intrinsics;
  c.robot_from_camera = camera.robot_from_camera;
  c.robot_from_lidar = lidar.robot_from_lidar;
  c.camera_from_lidar = camera.robot_from_camera.inverse().compose(lidar.robot_from_lidar);
  return c;
}

namespace {

// Conservative image-space bounds of a sphere seen by the camera. Returns the
// full image when the sphere reaches the image plane.
PixelRect sphere_bounds(const Eigen::Vector3d& c, double r,
                        const CameraIntrinsics& intr) {
  const PixelRect full{0, 0, intr.width, intr.height};
  if (c.z() + r <= kEps) return {};
  if (c.z() - r <= 0.05) return full;
  auto ratio_range = [&](double x, double* lo, double* hi) {
    const double top = x + r, bot = x - r;
    *hi = top >= 0.0 ? top / (c.z() - r) : top / (c.z() + r);
    *lo = bot >= 0.0 ? bot / (c.z() + r) : bot / (c.z() - r);
  };
  double xl, xh, yl, yh;
  ratio_range(c.x(), &xl, &xh);
  ratio_range(c.y(), &yl, &yh);
  PixelRect rect;
  rect.u0 = std::max(0, static_cast<int>(std::floor(intr.fx * xl + intr.px)) - 1);
  rect.u1 = std::min(intr.width, static_cast<int>(std::ceil(intr.fx * xh + intr.px)) + 2);
  rect.v0 = std::max(0, static_cast<int>(std::floor(intr.fy * yl + intr.py)) - 1);
  rect.v1 = std::min(intr.height, static_cast<int>(std::ceil(intr.fy * yh + intr.py)) + 2);
  if (rect.empty()) return {};
  return rect;
}

}  // namespace

Frame render_frame(const Scene& scene, const Pose2D5& robot_pose,
                   const SensorModel& sensors, uint64_t seed, int index,
                   double timestamp) {
  Frame frame;
  frame.index = index;
  frame.timestamp = timestamp;

  std::mt19937_64 depth_rng(mix_seed(seed, 1));
  std::mt19937_64 lidar_rng(mix_seed(seed, 2));
  std::mt19937_64 mask_rng(mix_seed(seed, 3));
  std::mt19937_64 pose_rng(mix_seed(seed, 4));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const CameraModel& cam = sensors.camera;
  const CameraIntrinsics& intr = cam.intrinsics;
  const Extrinsics map_from_robot = robot_pose.as_transform();
  const Extrinsics map_from_camera = map_from_robot.compose(cam.robot_from_camera);
  const Eigen::Vector3d cam_origin = map_from_camera.translation;
  const Eigen::Matrix3d& rmc = map_from_camera.rotation;
  const Extrinsics camera_from_map = map_from_camera.inverse();

  // Per-pixel nearest hit: structure first, then objects within their bounds.
  const int w = intr.width, h = intr.height;
  std::vector<double> tbuf(static_cast<size_t>(w) * h, kInf);
  std::vector<int16_t> idbuf(static_cast<size_t>(w) * h, -1);
  auto ray_dir = [&](int u, int v) {
    const Eigen::Vector3d dc((u - intr.px) / intr.fx, (v - intr.py) / intr.fy, 1.0);
    return Eigen::Vector3d(rmc * dc);
  };
  if (scene.config.floor || scene.config.walls) {
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        tbuf[static_cast<size_t>(v) * w + u] =
            hit_structure(scene.config, cam_origin, ray_dir(u, v));
      }
    }
  }
  std::vector<PixelRect> rects(scene.objects.size());
  for (size_t k = 0; k < scene.objects.size(); ++k) {
    const auto& obj = scene.objects[k];
    const Eigen::Vector3d c_cam = camera_from_map.apply(obj.center);
    rects[k] = sphere_bounds(c_cam, obj.ground_truth_radius, intr);
    const PixelRect& r = rects[k];
    for (int v = r.v0; v < r.v1; ++v) {
      for (int u = r.u0; u < r.u1; ++u) {
        const size_t i = static_cast<size_t>(v) * w + u;
        const double t = hit_object(obj, cam_origin, ray_dir(u, v));
        if (t < tbuf[i]) {
          tbuf[i] = t;
          idbuf[i] = static_cast<int16_t>(k);
        }
      }
    }
  }

  // Far side of nearby depth jumps, via a separable max filter. Rays without
  // a hit count as max range.
  std::vector<double> far;
  if (cam.flying_pixel_prob > 0.0 && cam.edge_width > 0) {
    const int r = cam.edge_width;
    auto finite = [&](double z) { return std::isfinite(z) ? z : cam.max_range; };
    std::vector<double> rowmax(tbuf.size());
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        double m = 0.0;
        for (int k = std::max(0, u - r); k <= std::min(w - 1, u + r); ++k) {
          m = std::max(m, finite(tbuf[static_cast<size_t>(v) * w + k]));
        }
        rowmax[static_cast<size_t>(v) * w + u] = m;
      }
    }
    far.assign(tbuf.size(), 0.0);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        double m = 0.0;
        for (int k = std::max(0, v - r); k <= std::min(h - 1, v + r); ++k) {
          m = std::max(m, rowmax[static_cast<size_t>(k) * w + u]);
        }
        far[static_cast<size_t>(v) * w + u] = m;
      }
    }
  }

  // Depth: t is the camera-frame z because the ray has unit z component.
  frame.depth = DepthImage(w, h);
  for (size_t i = 0; i < tbuf.size(); ++i) {
    double z = tbuf[i];
    if (!far.empty() && std::isfinite(z) && far[i] - z > cam.edge_jump &&
        unit(depth_rng) < cam.flying_pixel_prob) {
      z += unit(depth_rng) * (far[i] - z);
    }
    if (!std::isfinite(z) || z < cam.min_range || z > cam.max_range) continue;
    if (cam.dropout > 0.0 && unit(depth_rng) < cam.dropout) continue;
    double zm = z + cam.depth_bias * z * z;
    if (cam.noise_a > 0.0) zm += depth_noise_sigma(cam, z) * gauss(depth_rng);
    const double mm = std::round(zm * 1000.0);
    if (mm < 1.0) continue;
    frame.depth.data()[i] = static_cast<uint16_t>(std::min(mm, 65535.0));
  }

  // Masks from the visible silhouettes.
  const auto labels = scene.class_labels();
  for (size_t k = 0; k < scene.objects.size(); ++k) {
    const PixelRect& r = rects[k];
    if (r.empty()) continue;
    const auto& obj = scene.objects[k];
    const double dist = (obj.center - cam_origin).norm();
    std::vector<uint8_t> bits(static_cast<size_t>(r.u1 - r.u0) * (r.v1 - r.v0), 0);
    bool any = false;
    for (int v = r.v0; v < r.v1; ++v) {
      for (int u = r.u0; u < r.u1; ++u) {
        if (idbuf[static_cast<size_t>(v) * w + u] == static_cast<int16_t>(k)) {
          bits[static_cast<size_t>(v - r.v0) * (r.u1 - r.u0) + (u - r.u0)] = 1;
          any = true;
        }
      }
    }
    // Draw the corruption variates for every object so the stream does not
    // depend on which objects end up visible.
    const double swap_draw = unit(mask_rng);
    const double swap_pick = unit(mask_rng);
    const double conf = 0.6 + 0.4 * unit(mask_rng);
    if (!any || dist > sensors.masks.max_range) continue;
    BinaryMask mask = BinaryMask::from_roi(w, h, r, bits);
    if (sensors.masks.erosion > 0) mask = mask.eroded(sensors.masks.erosion);
    if (mask.count() < static_cast<size_t>(sensors.masks.min_pixels)) continue;
    DetectionMask det;
    det.class_label = obj.class_label;
    if (labels.size() > 1 && swap_draw < sensors.masks.label_swap) {
      std::vector<std::string> others;
      for (const auto& l : labels) {
        if (l != obj.class_label) others.push_back(l);
      }
      det.class_label = others[std::min(others.size() - 1,
                                        static_cast<size_t>(swap_pick * others.size()))];
    }
    det.confidence = conf;
    det.mask = std::move(mask);
    frame.masks.push_back(std::move(det));
  }

  // Lidar rings.
  const LidarModel& lid = sensors.lidar;
  Extrinsics robot_from_lidar_true = lid.robot_from_lidar;
  robot_from_lidar_true.rotation =
      Eigen::AngleAxisd(lid.extrinsic_yaw_error, Eigen::Vector3d::UnitZ())
          .toRotationMatrix() *
      lid.robot_from_lidar.rotation;
  const Extrinsics map_from_lidar = map_from_robot.compose(robot_from_lidar_true);
  const auto n_az = static_cast<int>(
      std::lround(2.0 * std::numbers::pi / lid.horizontal_resolution));
  frame.lidar.frame = FrameId::kLidar;
  frame.lidar.points.reserve(static_cast<size_t>(n_az) * lid.rings / 2);
  for (int ring = 0; ring < lid.rings; ++ring) {
    const double elev =
        lid.rings == 1 ? 0.0
                       : -0.5 * lid.vertical_fov + ring * lid.vertical_fov / (lid.rings - 1);
    for (int j = 0; j < n_az; ++j) {
      const double az = -std::numbers::pi + j * 2.0 * std::numbers::pi / n_az;
      const Eigen::Vector3d dl(std::cos(elev) * std::cos(az),
                               std::cos(elev) * std::sin(az), std::sin(elev));
      const double noise = lid.range_noise > 0.0 ? lid.range_noise * gauss(lidar_rng) : 0.0;
      auto hit = cast_ray(scene, map_from_lidar.translation, map_from_lidar.rotation * dl);
      if (!hit) continue;
      const double range = hit->t + noise;
      if (hit->t > lid.max_range || range <= 0.0) continue;
      frame.lidar.points.push_back(range * dl);
    }
  }

  frame.robot_pose = robot_pose;
  if (sensors.pose_noise > 0.0) {
    frame.robot_pose.position.x() += sensors.pose_noise * gauss(pose_rng);
    frame.robot_pose.position.y() += sensors.pose_noise * gauss(pose_rng);
  }
  return frame;
}

std::vector<std::pair<double, Pose2D5>> sample_trajectory(
    const TrajectoryConfig& traj) {
  if (traj.waypoints.size() < 2) {
    throw ConfigError("a trajectory needs at least two waypoints");
  }
  if (!(traj.speed > 0.0) || !(traj.rate > 0.0)) {
    throw ConfigError("trajectory speed and rate must be positive");
  }
  std::vector<double> cum{0.0};
  for (size_t i = 1; i < traj.waypoints.size(); ++i) {
    cum.push_back(cum.back() + (traj.waypoints[i] - traj.waypoints[i - 1]).norm());
  }
  const double total = cum.back();
  // Yaw of the first non-degenerate segment at or after each waypoint.
  std::vector<double> seg_yaw(traj.waypoints.size(), 0.0);
  double last = 0.0;
  for (size_t i = traj.waypoints.size() - 1; i-- > 0;) {
    const Eigen::Vector2d d = traj.waypoints[i + 1] - traj.waypoints[i];
    if (d.norm() > 0.0) last = std::atan2(d.y(), d.x());
    seg_yaw[i] = last;
  }
  std::vector<std::pair<double, Pose2D5>> out;
  if (total <= 0.0) {
    const auto& p = traj.waypoints.front();
    out.emplace_back(0.0, Pose2D5::from_xy_yaw(p.x(), p.y(), 0.0));
    return out;
  }
  const double duration = total / traj.speed;
  const auto n = static_cast<size_t>(std::floor(duration * traj.rate + 1e-9)) + 1;
  size_t seg = 0;
  for (size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / traj.rate;
    const double s = std::min(total, t * traj.speed);
    while (seg + 2 < cum.size() && s >= cum[seg + 1]) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double a = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    const Eigen::Vector2d p =
        traj.waypoints[seg] + a * (traj.waypoints[seg + 1] - traj.waypoints[seg]);
    out.emplace_back(t, Pose2D5::from_xy_yaw(p.x(), p.y(), seg_yaw[seg]));
  }
  return out;
}

TrajectorySource::TrajectorySource(Scene scene, TrajectoryConfig traj,
                                   SensorModel sensors, uint64_t seed)
    : scene_(std::move(scene)), sensors_(std::move(sensors)), seed_(seed),
      poses_(sample_trajectory(traj)) {}

std::optional<Frame> TrajectorySource::next() {
  if (cursor_ >= poses_.size()) return std::nullopt;
  const auto& [t, pose] = poses_[cursor_];
  const int index = static_cast<int>(cursor_) + 1;
  Frame f = render_frame(scene_, pose, sensors_, mix_seed(seed_, 1000 + cursor_),
                         index, t);
  ++cursor_;
  return f;
}

}  // namespace artmap
