#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "artmap/fusion.h"

namespace artmap {

// Windowed mean and mean squared distance to the mean over the last
// `capacity` map-frame centroids.
class MovingAverageFilter {
 public:
  explicit MovingAverageFilter(size_t capacity = 10);

  void push(const Eigen::Vector3d& x);

  size_t capacity() const { return capacity_; }
  size_t size() const { return window_.size(); }
  bool empty() const { return window_.empty(); }
  const std::deque<Eigen::Vector3d>& window() const { return window_; }
  const Eigen::Vector3d& mean() const { return mean_; }
  // Scalar variance in m^2.
  double variance() const { return variance_; }

 private:
  void recompute();

  size_t capacity_;
  std::deque<Eigen::Vector3d> window_;
  Eigen::Vector3d mean_ = Eigen::Vector3d::Zero();
  double variance_ = 0.0;
};

enum class ArtifactState { kTemporary, kStable };

struct TrackedArtifact {
  int id = 0;
  std::string class_label;
  MovingAverageFilter filter;
  std::deque<double> radius_window;
  double radius_mean = 0.0;
  double view_angle = 0.0;
  int observation_count = 0;
  ArtifactState state = ArtifactState::kTemporary;
  // Map position: the running mean until promotion, frozen afterwards.
  Eigen::Vector3d position = Eigen::Vector3d::Zero();

  static TrackedArtifact create(int id, const ArtifactEstimate& est,
                                size_t capacity);
};

struct ManagerConfig {
  size_t window = 10;
  double stability_period = 0.2;  // seconds of simulated time
  bool stability_use_stddev = false;

  void validate() const;
};

// Pushes the estimate into the artifact's windows. Throws ContractViolation
// if the classes differ.
void update_filter(TrackedArtifact& artifact, const ArtifactEstimate& est);

// variance < radius/2 (or sqrt(variance) with use_stddev) and
// fill >= ceil(capacity/2).
bool is_stable(double variance, double radius, size_t fill, size_t capacity,
               bool use_stddev = false);
bool check_stability(const TrackedArtifact& artifact, bool use_stddev = false);

// Same class, distance to the artifact's position below its radius_mean;
// nearest wins, ties go to the lowest id.
std::optional<int> associate(const ArtifactEstimate& est,
                             const std::vector<TrackedArtifact>& tracked);

struct MapArtifact {
  int id = 0;
  std::string class_label;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double radius = 0.0;
  double view_angle = 0.0;
  int observations = 0;

  bool operator==(const MapArtifact&) const = default;
};

struct MapMetadata {
  std::string run_id;
  std::string created;  // ISO-8601
  std::string config_digest;

  bool operator==(const MapMetadata&) const = default;
};

struct ArtifactMap {
  MapMetadata meta;
  std::vector<MapArtifact> artifacts;

  bool operator==(const ArtifactMap&) const = default;
};

// Merges same-class artifacts whose XY discs intersect until none do.
ArtifactMap finalize_merge(const ArtifactMap& map);

// True iff the XY discs of two same-class artifacts overlap.
bool overlaps_xy(const MapArtifact& a, const MapArtifact& b);

struct AssociationResult {
  int id = 0;
  bool created = false;
  bool stable = false;  // matched an already stable artifact
};

struct BufferSnapshot {
  std::vector<TrackedArtifact> temporary;
  std::vector<TrackedArtifact> stable;
};

// Temporary and stable buffers behind one mutex. Filtering (ingest) and
// stabilization (stabilize / promote) may run on different threads.
class ArtifactManager {
 public:
  explicit ArtifactManager(ManagerConfig cfg = {});

  AssociationResult ingest(const ArtifactEstimate& est);
  // Promotes every temporary artifact passing check_stability.
  std::vector<int> stabilize();
  // Moves a temporary artifact to the stable buffer. Returns false when the
  // id is already stable or unknown.
  bool promote(int id);
  // Removes from either buffer; false if the id is unknown.
  bool remove(int id);

  BufferSnapshot snapshot() const;
  std::optional<TrackedArtifact> find(int id) const;
  ArtifactMap stable_map(const MapMetadata& meta) const;
  const ManagerConfig& config() const { return cfg_; }

 private:
  ManagerConfig cfg_;
  mutable std::mutex mu_;
  std::map<int, TrackedArtifact> temporary_;
  std::map<int, TrackedArtifact> stable_;
  int next_id_ = 0;
};

MapArtifact to_map_artifact(const TrackedArtifact& a);

}  // namespace artmap
