#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "artmap/config.h"
#include "artmap/manager.h"
#include "artmap/simulator.h"

namespace artmap {

// Ordered multi-producer queue. pop() blocks until an item arrives or the
// channel is closed and drained.
template <typename T>
class Channel {
 public:
  explicit Channel(size_t capacity = 0) : capacity_(capacity) {}

  // Returns false if the channel was closed.
  bool push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || capacity_ == 0 || q_.size() < capacity_; });
    if (closed_) return false;
    q_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !q_.empty(); });
    if (q_.empty()) return std::nullopt;
    T item = std::move(q_.front());
    q_.pop_front();
    not_full_.notify_one();
    return item;
  }

  std::optional<T> try_pop() {
    std::lock_guard lock(mu_);
    if (q_.empty()) return std::nullopt;
    T item = std::move(q_.front());
    q_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
  std::deque<T> q_;
  bool closed_ = false;
};

// Totally ordered event stream. Every published event gets the next
// sequence number; subscribers are called in publish order.
class EventBus {
 public:
  using Subscriber = std::function<void(const nlohmann::json&)>;

  int subscribe(Subscriber s);
  // Delivers snapshot() to s and registers it atomically with respect to
  // publish, so s sees the snapshot followed by every later event.
  int subscribe(Subscriber s, const std::function<nlohmann::json()>& snapshot);
  void unsubscribe(int token);
  // Adds "seq" to the event and fans it out.
  void publish(nlohmann::json event);
  uint64_t published() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::pair<int, Subscriber>> subs_;
  int next_token_ = 0;
  uint64_t seq_ = 0;
};

// Appends each event as one JSON line.
class EventLog {
 public:
  explicit EventLog(const std::filesystem::path& path);
  void write(const nlohmann::json& event);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

nlohmann::json pose_to_json(const Pose2D5& pose);

// ISO-8601 UTC after adding `seconds` to an epoch such as
// "2024-01-01T00:00:00Z". Throws ConfigError on a malformed epoch.
std::string iso_after(const std::string& epoch, double seconds);

// Perception plus manager for one run. Stabilization scans run every
// manager.stability_period of frame time, interleaved with the frames.
class MappingPipeline {
 public:
  MappingPipeline(const PipelineConfig& cfg, const Calibration& calib,
                  EventBus* bus = nullptr);

  // Estimates, associates and stabilizes; publishes one "frame" event.
  void process(const Frame& frame);
  // Runs any stabilization scans due up to time t.
  void advance_to(double t);
  // Stabilization scan at the current clock, for an external stabilizer.
  void stabilize_now();
  // Final scan, then the end-of-run merge.
  ArtifactMap finish();

  void set_class_filter(std::set<std::string> classes);
  std::set<std::string> class_filter() const;
  bool remove(int id);

  ArtifactManager& manager() { return manager_; }
  const ArtifactManager& manager() const { return manager_; }
  MapMetadata metadata() const;
  std::optional<Pose2D5> last_pose() const;
  size_t frames() const { return frames_; }
  size_t dropped() const { return dropped_; }
  double clock() const { return clock_.load(); }

 private:
  void scan(double t);

  PipelineConfig cfg_;
  Calibration calib_;
  EventBus* bus_;
  ArtifactManager manager_;
  mutable std::mutex filter_mu_;
  std::set<std::string> classes_;
  mutable std::mutex pose_mu_;
  std::optional<Pose2D5> last_pose_;
  std::atomic<double> clock_{0.0};
  long next_scan_ = 0;  // index of the next scan at next_scan_ * period
  size_t frames_ = 0;
  size_t dropped_ = 0;
  std::string run_id_;
};

struct MappingResult {
  ArtifactMap map;
  size_t frames = 0;
  size_t dropped = 0;
};

// Streams `source` through a pipeline on a consumer thread fed by a
// producer thread. Deterministic for a fixed source and config.
MappingResult run_mapping(FrameSource& source, const Calibration& calib,
                          const PipelineConfig& cfg, EventBus* bus = nullptr);

struct GoalCommand {
  int artifact_id = 0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  bool inside_ring = false;  // robot was already within the standoff ring
};

// Goal on the robot-to-artifact line at radius + margin from the centroid,
// facing it. Inside that ring the goal is the current position, turned.
GoalCommand compute_goal(const MapArtifact& artifact, const Pose2D5& robot_pose,
                         double margin);

// Kinematic robot: drives straight segments toward queued waypoints at a
// fixed speed, then holds.
class RobotController {
 public:
  RobotController(Pose2D5 start, double speed);

  void set_waypoints(std::vector<Eigen::Vector2d> waypoints);
  // Replaces the queue with a single goal and final heading.
  void go_to(const GoalCommand& goal);
  void step(double dt);

  Pose2D5 pose() const { return pose_; }
  bool idle() const { return queue_.empty() && !final_heading_; }
  std::optional<GoalCommand> goal() const { return goal_; }

 private:
  Pose2D5 pose_;
  double speed_;
  std::deque<Eigen::Vector2d> queue_;
  std::optional<double> final_heading_;
  std::optional<GoalCommand> goal_;
};

}  // namespace artmap
