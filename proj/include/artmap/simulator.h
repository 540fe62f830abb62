#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "artmap/calibration.h"
#include "artmap/frame.h"

namespace artmap {

enum class Shape { kSphere, kBox, kCylinder };
std::string_view to_string(Shape s);
Shape shape_from_string(std::string_view name);

struct SceneObject {
  int id = 0;
  std::string class_label;
  Shape shape = Shape::kSphere;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // map frame
  // Full extents along the object's local x, y, z (a sphere of radius r is
  // (2r, 2r, 2r); a cylinder (2r, 2r, h)).
  Eigen::Vector3d dimensions = Eigen::Vector3d::Ones();
  double yaw = 0.0;  // boxes only
  double ground_truth_radius = 0.0;

  bool operator==(const SceneObject&) const = default;
};

// Radius of the smallest sphere about the center enclosing the shape.
double bounding_radius(Shape shape, const Eigen::Vector3d& dimensions);

struct ObjectClassSpec {
  std::string label;
  Shape shape = Shape::kSphere;
  Eigen::Vector3d dimensions = Eigen::Vector3d::Ones();
};

struct SceneConfig {
  double arena_x = 20.0;  // room size, centered on the origin
  double arena_y = 20.0;
  bool floor = false;
  bool walls = false;
  double wall_height = 2.5;
  int object_count = 0;
  std::vector<ObjectClassSpec> classes;
  // Minimum free space between bounding spheres of two objects.
  double min_gap = 0.05;
  // Minimum distance between object footprints and the keep-out path.
  double path_clearance = 0.0;
  std::vector<Eigen::Vector2d> keep_out_path;
  double wall_margin = 0.5;
  int max_attempts = 20000;

  void validate() const;
};

struct Scene {
  SceneConfig config;
  std::vector<SceneObject> objects;

  std::vector<std::string> class_labels() const;
};

// Deterministic placement from the seed. Throws PlacementError if the arena
// cannot hold every object.
Scene generate_scene(const SceneConfig& config, uint64_t seed);

struct CameraModel {
  CameraIntrinsics intrinsics{385.0, 385.0, 320.0, 240.0, 640, 480};
  Extrinsics robot_from_camera;  // optical frame: x right, y down, z forward
  double min_range = 0.3;
  double max_range = 20.0;
  double noise_a = 0.002;  // sigma(d) = a * d^2
  double dropout = 0.01;
  // Systematic range error b * d^2 (disparity bias of a stereo sensor).
  double depth_bias = 0.0;
  // Mixed ("flying") pixels: a pixel within edge_width of a depth jump larger
  // than edge_jump takes, with probability flying_pixel_prob, a depth drawn
  // uniformly between its own and the far side of the jump.
  int edge_width = 2;
  double edge_jump = 0.3;
  double flying_pixel_prob = 0.0;
};

struct LidarModel {
  int rings = 16;
  double vertical_fov = 0.5235987755982988;        // 30 degrees, symmetric
  double horizontal_resolution = 0.006981317007977318;  // 0.4 degrees
  double range_noise = 0.02;
  double max_range = 30.0;
  Extrinsics robot_from_lidar;
  // Yaw offset between the true lidar mounting and the calibrated one.
  double extrinsic_yaw_error = 0.0;
};

struct MaskModel {
  int erosion = 1;
  double label_swap = 0.02;
  int min_pixels = 30;
  double max_range = 16.0;
};

struct SensorModel {
  CameraModel camera;
  LidarModel lidar;
  MaskModel masks;
  double pose_noise = 0.0;  // meters, applied to the reported pose

  SensorModel();
  void validate() const;
  // Nominal calibration, as written next to a dataset.
  Calibration calibration() const;
};

// Standard deviation of the camera depth noise at range d.
inline double depth_noise_sigma(const CameraModel& cam, double d) {
  return cam.noise_a * d * d;
}

// Ray cast result against the scene. object is -1 for room structure.
struct RayHit {
  double t = 0.0;
  int object = -1;
};

std::optional<RayHit> cast_ray(const Scene& scene, const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& dir);

// Renders one frame: depth by per-pixel ray casting, lidar by per-ring and
// per-azimuth casting, masks from the exact silhouettes with corruption.
Frame render_frame(const Scene& scene, const Pose2D5& robot_pose,
                   const SensorModel& sensors, uint64_t seed, int index = 0,
                   double timestamp = 0.0);

struct TrajectoryConfig {
  std::vector<Eigen::Vector2d> waypoints;
  double speed = 0.5;  // m/s
  double rate = 2.0;   // frames per second
};

// Poses at constant speed along the polyline, yaw facing the travel
// direction, sampled every 1/rate seconds.
std::vector<std::pair<double, Pose2D5>> sample_trajectory(
    const TrajectoryConfig& traj);

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<Frame> next() = 0;
};

// Lazily renders frames along a trajectory.
class TrajectorySource : public FrameSource {
 public:
  TrajectorySource(Scene scene, TrajectoryConfig traj, SensorModel sensors,
                   uint64_t seed);
  std::optional<Frame> next() override;
  size_t frame_count() const { return poses_.size(); }
  const Scene& scene() const { return scene_; }

 private:
  Scene scene_;
  SensorModel sensors_;
  uint64_t seed_;
  std::vector<std::pair<double, Pose2D5>> poses_;
  size_t cursor_ = 0;
};

// Per-frame seed derived from the dataset seed.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

}  // namespace artmap
