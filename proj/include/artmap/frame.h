#pragma once

#include <string>
#include <vector>

#include "artmap/cloud_filters.h"
#include "artmap/geometry.h"
#include "artmap/raster.h"

namespace artmap {

struct DetectionMask {
  std::string class_label;
  double confidence = 1.0;
  BinaryMask mask;

  bool operator==(const DetectionMask&) const = default;
};

// One time step of sensor input.
struct Frame {
  int index = 0;
  double timestamp = 0.0;
  Pose2D5 robot_pose;
  DepthImage depth;
  PointCloud lidar{FrameId::kLidar, {}};
  std::vector<DetectionMask> masks;
};

}  // namespace artmap
