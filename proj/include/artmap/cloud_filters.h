#pragma once

#include <vector>

#include <Eigen/Core>

#include "artmap/geometry.h"

namespace artmap {

struct PointCloud {
  FrameId frame = FrameId::kCamera;
  std::vector<Eigen::Vector3d> points;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct FilterParams {
  double voxel_leaf = 0.05;
  double neighbor_radius = 0.3;
  double min_neighbor_fraction = 0.05;
  int min_neighbors_floor = 5;
  // Whether the voxel pass runs before the radius filter.
  bool downsample = true;

  void validate() const;
  // k = max(floor, floor(fraction * n)).
  size_t required_neighbors(size_t n) const;
};

// One output point per occupied voxel [i*leaf, (i+1)*leaf)^3, equal to the
// centroid of its points, ordered by voxel index (x, then y, then z).
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

// Keeps p iff at least k other points lie within neighbor_radius of p
// (distance <= radius). Input order is preserved.
PointCloud radius_outlier_removal(const PointCloud& cloud,
                                  const FilterParams& params);

// Throws EmptyCloudError on an empty cloud.
Point3 centroid(const PointCloud& cloud);

// Mean of the two largest per-axis extents (max - min).
double extent_radius(const PointCloud& cloud);

}  // namespace artmap
