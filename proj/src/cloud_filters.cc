#include "artmap/cloud_filters.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <unordered_map>

#include "artmap/error.h"

namespace artmap {

namespace {

using VoxelKey = std::array<int64_t, 3>;

struct KeyHash {
  size_t operator()(const VoxelKey& k) const {
    uint64_t h = 1469598103934665603ull;
    for (int64_t c : k) {
      h ^= static_cast<uint64_t>(c);
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

VoxelKey key_of(const Eigen::Vector3d& p, double cell) {
  return {static_cast<int64_t>(std::floor(p.x() / cell)),
          static_cast<int64_t>(std::floor(p.y() / cell)),
          static_cast<int64_t>(std::floor(p.z() / cell))};
}

// Rounding can push a centroid that sits on a voxel face into the neighbour;
// step it back one ulp at a time so a second pass sees the same voxel.
double pull_into_voxel(double c, int64_t index, double leaf) {
  for (int i = 0; i < 64; ++i) {
    const auto k = static_cast<int64_t>(std::floor(c / leaf));
    if (k == index) return c;
    c = std::nextafter(c, k < index ? HUGE_VAL : -HUGE_VAL);
  }
  return c;
}

}  // namespace

void FilterParams::validate() const {
  if (downsample && !(voxel_leaf > 0.0)) {
    throw ContractViolation("voxel_leaf must be positive");
  }
  if (!(neighbor_radius > 0.0)) {
    throw ContractViolation("neighbor_radius must be positive");
  }
  if (!(min_neighbor_fraction > 0.0 && min_neighbor_fraction <= 1.0)) {
    throw ContractViolation("min_neighbor_fraction must lie in (0, 1]");
  }
  if (min_neighbors_floor < 1) {
    throw ContractViolation("min_neighbors_floor must be at least 1");
  }
}

size_t FilterParams::required_neighbors(size_t n) const {
  const auto scaled =
      static_cast<size_t>(std::floor(min_neighbor_fraction * static_cast<double>(n)));
  return std::max(static_cast<size_t>(min_neighbors_floor), scaled);
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (!(leaf > 0.0)) throw ContractViolation("voxel leaf must be positive");
  struct Acc {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    size_t n = 0;
  };
  std::map<VoxelKey, Acc> voxels;
  for (const auto& p : cloud.points) {
    auto& acc = voxels[key_of(p, leaf)];
    acc.sum += p;
    ++acc.n;
  }
  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(voxels.size());
  for (const auto& [key, acc] : voxels) {
    Eigen::Vector3d c = acc.sum / static_cast<double>(acc.n);
    for (int axis = 0; axis < 3; ++axis) {
      c[axis] = pull_into_voxel(c[axis], key[axis], leaf);
    }
    out.points.push_back(c);
  }
  return out;
}

PointCloud radius_outlier_removal(const PointCloud& cloud,
                                  const FilterParams& params) {
  params.validate();
  PointCloud out;
  out.frame = cloud.frame;
  const size_t n = cloud.size();
  if (n == 0) return out;

  const double r = params.neighbor_radius;
  const double r2 = r * r;
  const size_t k = params.required_neighbors(n);
  if (k > n - 1) return out;

  // Cells slightly wider than r, so rounding in the division can never put a
  // neighbour at distance exactly r two cells away.
  const double cell = r * (1.0 + 1e-9);
  std::unordered_map<VoxelKey, std::vector<uint32_t>, KeyHash> grid;
  grid.reserve(n);
  std::vector<VoxelKey> keys(n);
  for (size_t i = 0; i < n; ++i) {
    keys[i] = key_of(cloud.points[i], cell);
    grid[keys[i]].push_back(static_cast<uint32_t>(i));
  }

  out.points.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& p = cloud.points[i];
    size_t count = 0;
    for (int dx = -1; dx <= 1 && count < k; ++dx) {
      for (int dy = -1; dy <= 1 && count < k; ++dy) {
        for (int dz = -1; dz <= 1 && count < k; ++dz) {
          auto it = grid.find({keys[i][0] + dx, keys[i][1] + dy, keys[i][2] + dz});
          if (it == grid.end()) continue;
          for (uint32_t j : it->second) {
            if (j == i) continue;
            if ((cloud.points[j] - p).squaredNorm() <= r2 && ++count >= k) break;
          }
        }
      }
    }
    if (count >= k) out.points.push_back(p);
  }
  return out;
}

Point3 centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloudError("centroid of an empty cloud");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) sum += p;
  return Point3(sum / static_cast<double>(cloud.size()), cloud.frame);
}

double extent_radius(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloudError("extent of an empty cloud");
  Eigen::Vector3d lo = cloud.points.front();
  Eigen::Vector3d hi = lo;
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  std::array<double, 3> ext{hi.x() - lo.x(), hi.y() - lo.y(), hi.z() - lo.z()};
  std::sort(ext.begin(), ext.end());
  return 0.5 * (ext[1] + ext[2]);
}

}  // namespace artmap
