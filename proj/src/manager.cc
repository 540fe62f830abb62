#include "artmap/manager.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "artmap/error.h"

namespace artmap {

MovingAverageFilter::MovingAverageFilter(size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ContractViolation("filter capacity must be >= 1");
}

void MovingAverageFilter::push(const Eigen::Vector3d& x) {
  window_.push_back(x);
  if (window_.size() > capacity_) window_.pop_front();
  recompute();
}

// The window is at most a few tens of points; a full pass keeps mean and
// variance exactly equal to their definitions.
void MovingAverageFilter::recompute() {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& x : window_) sum += x;
  const double n = static_cast<double>(window_.size());
  mean_ = sum / n;
  double acc = 0.0;
  for (const auto& x : window_) acc += (x - mean_).squaredNorm();
  variance_ = acc / n;
}

TrackedArtifact TrackedArtifact::create(int id, const ArtifactEstimate& est,
                                        size_t capacity) {
  TrackedArtifact a;
  a.id = id;
  a.class_label = est.class_label;
  a.filter = MovingAverageFilter(capacity);
  update_filter(a, est);
  return a;
}

void ManagerConfig::validate() const {
  if (window < 1) throw ConfigError("manager window must be >= 1");
  if (!(stability_period > 0.0)) {
    throw ConfigError("stability_period must be positive");
  }
}

void update_filter(TrackedArtifact& a, const ArtifactEstimate& est) {
  if (a.class_label != est.class_label) {
    throw ContractViolation("cannot update a '" + a.class_label +
                            "' artifact with a '" + est.class_label +
                            "' estimate");
  }
  a.filter.push(est.centroid.xyz);
  a.radius_window.push_back(std::max(0.0, est.radius));
  if (a.radius_window.size() > a.filter.capacity()) a.radius_window.pop_front();
  double sum = 0.0;
  for (double r : a.radius_window) sum += r;
  a.radius_mean = sum / static_cast<double>(a.radius_window.size());
  a.view_angle = est.view_angle;
  a.position = a.filter.mean();
  ++a.observation_count;
}

bool is_stable(double variance, double radius, size_t fill, size_t capacity,
               bool use_stddev) {
  const double spread = use_stddev ? std::sqrt(variance) : variance;
  const size_t half = (capacity + 1) / 2;
  return spread < radius / 2.0 && fill >= half;
}

bool check_stability(const TrackedArtifact& a, bool use_stddev) {
  return is_stable(a.filter.variance(), a.radius_mean, a.filter.size(),
                   a.filter.capacity(), use_stddev);
}

namespace {

// Candidate ordering: (distance, id). Returns true if `a` beats `b`.
struct Best {
  double dist = std::numeric_limits<double>::infinity();
  int id = std::numeric_limits<int>::max();
  bool found = false;

  void offer(const TrackedArtifact& t, const ArtifactEstimate& est) {
    if (t.class_label != est.class_label) return;
    const double d = (est.centroid.xyz - t.position).norm();
    if (!(d < t.radius_mean)) return;
    if (std::tie(d, t.id) < std::tie(dist, id)) {
      dist = d;
      id = t.id;
      found = true;
    }
  }
};

}  // namespace

std::optional<int> associate(const ArtifactEstimate& est,
                             const std::vector<TrackedArtifact>& tracked) {
  Best best;
  for (const auto& t : tracked) best.offer(t, est);
  if (!best.found) return std::nullopt;
  return best.id;
}

bool overlaps_xy(const MapArtifact& a, const MapArtifact& b) {
  if (a.class_label != b.class_label) return false;
  const double d = (a.position.head<2>() - b.position.head<2>()).norm();
  return d < a.radius + b.radius;
}

namespace {

MapArtifact merge_pair(const MapArtifact& a, const MapArtifact& b) {
  MapArtifact m;
  m.id = std::min(a.id, b.id);
  m.class_label = a.class_label;
  const double wa = std::max(a.observations, 1);
  const double wb = std::max(b.observations, 1);
  m.position = (wa * a.position + wb * b.position) / (wa + wb);
  const double d = (a.position - b.position).norm();
  const double big = std::max(a.radius, b.radius);
  double r = 0.5 * (d + a.radius + b.radius);
  r = std::max(r, big);
  m.radius = std::min(r, 1.5 * big);
  m.view_angle = a.id <= b.id ? a.view_angle : b.view_angle;
  m.observations = a.observations + b.observations;
  return m;
}

}  // namespace

ArtifactMap finalize_merge(const ArtifactMap& map) {
  ArtifactMap out;
  out.meta = map.meta;
  std::vector<MapArtifact> items = map.artifacts;
  // Canonical order makes the result independent of the input permutation.
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return std::tie(a.class_label, a.id) < std::tie(b.class_label, b.id);
  });
  while (true) {
    // Merge the closest overlapping pair first; ties broken by ids.
    size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (size_t i = 0; i < items.size(); ++i) {
      for (size_t j = i + 1; j < items.size(); ++j) {
        if (!overlaps_xy(items[i], items[j])) continue;
        const double d =
            (items[i].position.head<2>() - items[j].position.head<2>()).norm();
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
          any = true;
        }
      }
    }
    if (!any) break;
    items[bi] = merge_pair(items[bi], items[bj]);
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  out.artifacts = std::move(items);
  return out;
}

ArtifactManager::ArtifactManager(ManagerConfig cfg) : cfg_(cfg) {
  cfg_.validate();
}

AssociationResult ArtifactManager::ingest(const ArtifactEstimate& est) {
  std::lock_guard lock(mu_);
  Best best;
  for (const auto& [id, t] : temporary_) best.offer(t, est);
  for (const auto& [id, t] : stable_) best.offer(t, est);
  if (!best.found) {
    const int id = next_id_++;
    temporary_.emplace(id, TrackedArtifact::create(id, est, cfg_.window));
    return {id, true, false};
  }
  if (auto it = stable_.find(best.id); it != stable_.end()) {
    ++it->second.observation_count;
    return {best.id, false, true};
  }
  update_filter(temporary_.at(best.id), est);
  return {best.id, false, false};
}

std::vector<int> ArtifactManager::stabilize() {
  std::lock_guard lock(mu_);
  std::vector<int> promoted;
  for (auto it = temporary_.begin(); it != temporary_.end();) {
    if (check_stability(it->second, cfg_.stability_use_stddev)) {
      auto node = temporary_.extract(it++);
      node.mapped().state = ArtifactState::kStable;
      promoted.push_back(node.key());
      stable_.insert(std::move(node));
    } else {
      ++it;
    }
  }
  return promoted;
}

bool ArtifactManager::promote(int id) {
  std::lock_guard lock(mu_);
  auto it = temporary_.find(id);
  if (it == temporary_.end()) return false;
  auto node = temporary_.extract(it);
  node.mapped().state = ArtifactState::kStable;
  stable_.insert(std::move(node));
  return true;
}

bool ArtifactManager::remove(int id) {
  std::lock_guard lock(mu_);
  return stable_.erase(id) > 0 || temporary_.erase(id) > 0;
}

BufferSnapshot ArtifactManager::snapshot() const {
  std::lock_guard lock(mu_);
  BufferSnapshot s;
  for (const auto& [id, t] : temporary_) s.temporary.push_back(t);
  for (const auto& [id, t] : stable_) s.stable.push_back(t);
  return s;
}

std::optional<TrackedArtifact> ArtifactManager::find(int id) const {
  std::lock_guard lock(mu_);
  if (auto it = stable_.find(id); it != stable_.end()) return it->second;
  if (auto it = temporary_.find(id); it != temporary_.end()) return it->second;
  return std::nullopt;
}

MapArtifact to_map_artifact(const TrackedArtifact& a) {
  return {a.id,         a.class_label, a.position, a.radius_mean,
          a.view_angle, a.observation_count};
}

ArtifactMap ArtifactManager::stable_map(const MapMetadata& meta) const {
  std::lock_guard lock(mu_);
  ArtifactMap m;
  m.meta = meta;
  for (const auto& [id, t] : stable_) m.artifacts.push_back(to_map_artifact(t));
  return m;
}

}  // namespace artmap
