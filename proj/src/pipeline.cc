#include "artmap/pipeline.h"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <numbers>
#include <thread>

#include "artmap/digest.h"
#include "artmap/error.h"
#include "artmap/map_io.h"

namespace artmap {

using nlohmann::json;

int EventBus::subscribe(Subscriber s) {
  std::lock_guard lock(mu_);
  subs_.emplace_back(next_token_, std::move(s));
  return next_token_++;
}

int EventBus::subscribe(Subscriber s, const std::function<json()>& snapshot) {
  std::lock_guard lock(mu_);
  s(snapshot());
  subs_.emplace_back(next_token_, std::move(s));
  return next_token_++;
}

void EventBus::unsubscribe(int token) {
  std::lock_guard lock(mu_);
  std::erase_if(subs_, [&](const auto& p) { return p.first == token; });
}

void EventBus::publish(json event) {
  // Held across delivery so every subscriber sees the same total order.
  std::lock_guard lock(mu_);
  event["seq"] = seq_++;
  for (const auto& [token, fn] : subs_) fn(event);
}

uint64_t EventBus::published() const {
  std::lock_guard lock(mu_);
  return seq_;
}

EventLog::EventLog(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw IngestionError("cannot write event log " + path.string());
}

void EventLog::write(const json& event) {
  std::lock_guard lock(mu_);
  out_ << event.dump() << '\n';
  out_.flush();
}

json pose_to_json(const Pose2D5& pose) {
  return {{"x", pose.position.x()},
          {"y", pose.position.y()},
          {"z", pose.position.z()},
          {"yaw", pose.yaw()}};
}

std::string iso_after(const std::string& epoch, double seconds) {
  std::tm tm{};
  int y, mo, d, h, mi, s;
  char z = 0;
  if (std::sscanf(epoch.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 ||
      z != 'Z') {
    throw ConfigError("clock epoch must look like 2024-01-01T00:00:00Z, got '" + epoch + "'");
  }
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = s;
  const time_t t = timegm(&tm) + static_cast<time_t>(std::floor(seconds));
  std::tm out{};
  gmtime_r(&t, &out);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &out);
  return buf;
}

MappingPipeline::MappingPipeline(const PipelineConfig& cfg, const Calibration& calib,
                                 EventBus* bus)
    : cfg_(cfg), calib_(calib), bus_(bus), manager_(cfg.manager), classes_(cfg.classes) {
  cfg_.validate();
  calib_.validate();
  const std::string digest = config_digest(cfg_);
  run_id_ = hex64(fnv1a64(digest + ":" + std::to_string(cfg_.run.seed)));
}

MapMetadata MappingPipeline::metadata() const {
  return {run_id_, iso_after(cfg_.run.clock_epoch, clock_.load()), config_digest(cfg_)};
}

void MappingPipeline::set_class_filter(std::set<std::string> classes) {
  std::lock_guard lock(filter_mu_);
  classes_ = std::move(classes);
}

std::set<std::string> MappingPipeline::class_filter() const {
  std::lock_guard lock(filter_mu_);
  return classes_;
}

bool MappingPipeline::remove(int id) { return manager_.remove(id); }

std::optional<Pose2D5> MappingPipeline::last_pose() const {
  std::lock_guard lock(pose_mu_);
  return last_pose_;
}

void MappingPipeline::scan(double t) {
  const auto promoted = manager_.stabilize();
  if (bus_ && !promoted.empty()) {
    json arts = json::array();
    for (int id : promoted) {
      if (auto a = manager_.find(id)) arts.push_back(artifact_to_json(to_map_artifact(*a)));
    }
    bus_->publish({{"type", "promoted"}, {"time", t}, {"ids", promoted}, {"artifacts", arts}});
  }
}

void MappingPipeline::advance_to(double t) {
  const double period = cfg_.manager.stability_period;
  while (static_cast<double>(next_scan_) * period <= t) {
    scan(static_cast<double>(next_scan_) * period);
    ++next_scan_;
  }
  if (t > clock_.load()) clock_.store(t);
}

void MappingPipeline::process(const Frame& frame) {
  advance_to(frame.timestamp);
  {
    std::lock_guard lock(pose_mu_);
    last_pose_ = frame.robot_pose;
  }
  const FrameEstimates fe = estimate_artifacts(frame, calib_, cfg_.perception, class_filter());
  ++frames_;
  dropped_ += fe.dropped.size();

  json detections = json::array();
  std::vector<int> created, updated;
  for (const auto& est : fe.estimates) {
    const AssociationResult res = manager_.ingest(est);
    (res.created ? created : updated).push_back(res.id);
    detections.push_back({{"class", est.class_label},
                          {"id", res.id},
                          {"position", {est.centroid.xyz.x(), est.centroid.xyz.y(),
                                        est.centroid.xyz.z()}},
                          {"radius", est.radius},
                          {"branch", std::string(to_string(est.branch))}});
  }
  if (bus_) {
    bus_->publish({{"type", "frame"},
                   {"time", frame.timestamp},
                   {"index", frame.index},
                   {"robot_pose", pose_to_json(frame.robot_pose)},
                   {"detections", detections},
                   {"created", created},
                   {"updated", updated},
                   {"dropped", fe.dropped.size()}});
  }
}

void MappingPipeline::stabilize_now() { scan(clock_.load()); }

ArtifactMap MappingPipeline::finish() {
  scan(clock_.load());
  ArtifactMap map = finalize_merge(manager_.stable_map(metadata()));
  if (bus_) {
    bus_->publish({{"type", "run_end"},
                   {"time", clock_.load()},
                   {"frames", frames_},
                   {"artifacts", map.artifacts.size()}});
  }
  return map;
}

MappingResult run_mapping(FrameSource& source, const Calibration& calib,
                          const PipelineConfig& cfg, EventBus* bus) {
  // Validate before the producer starts so errors surface on this thread.
  MappingPipeline pipeline(cfg, calib, bus);
  Channel<Frame> frames(8);
  std::exception_ptr producer_error;
  std::thread producer([&] {
    try {
      while (auto f = source.next()) {
        if (!frames.push(std::move(*f))) break;
      }
    } catch (...) {
      producer_error = std::current_exception();
    }
    frames.close();
  });
  try {
    while (auto f = frames.pop()) pipeline.process(*f);
  } catch (...) {
    frames.close();
    producer.join();
    throw;
  }
  producer.join();
  if (producer_error) std::rethrow_exception(producer_error);
  MappingResult out;
  out.map = pipeline.finish();
  out.frames = pipeline.frames();
  out.dropped = pipeline.dropped();
  return out;
}

GoalCommand compute_goal(const MapArtifact& artifact, const Pose2D5& robot_pose,
                         double margin) {
  if (margin < 0.0) throw ContractViolation("goal margin must be >= 0");
  GoalCommand g;
  g.artifact_id = artifact.id;
  const Eigen::Vector2d robot = robot_pose.position.head<2>();
  const Eigen::Vector2d target = artifact.position.head<2>();
  const Eigen::Vector2d to_target = target - robot;
  const double dist = to_target.norm();
  const double standoff = artifact.radius + margin;
  g.heading = dist > 0.0 ? std::atan2(to_target.y(), to_target.x()) : robot_pose.yaw();
  if (dist <= standoff) {
    g.x = robot.x();
    g.y = robot.y();
    g.inside_ring = true;
    return g;
  }
  const Eigen::Vector2d goal = target - to_target / dist * standoff;
  g.x = goal.x();
  g.y = goal.y();
  return g;
}

RobotController::RobotController(Pose2D5 start, double speed)
    : pose_(std::move(start)), speed_(speed) {
  if (!(speed > 0.0)) throw ContractViolation("robot speed must be positive");
}

void RobotController::set_waypoints(std::vector<Eigen::Vector2d> waypoints) {
  queue_.assign(waypoints.begin(), waypoints.end());
  final_heading_.reset();
  goal_.reset();
}

void RobotController::go_to(const GoalCommand& goal) {
  queue_.clear();
  queue_.emplace_back(goal.x, goal.y);
  final_heading_ = goal.heading;
  goal_ = goal;
}

void RobotController::step(double dt) {
  double budget = speed_ * dt;
  const double z = pose_.position.z();
  while (!queue_.empty()) {
    const Eigen::Vector2d at = pose_.position.head<2>();
    const Eigen::Vector2d d = queue_.front() - at;
    const double len = d.norm();
    if (len <= budget + 1e-9) {  // absorbs accumulated rounding
      const double yaw = len > 1e-12 ? std::atan2(d.y(), d.x()) : pose_.yaw();
      pose_ = Pose2D5::from_xy_yaw(queue_.front().x(), queue_.front().y(), yaw, z);
      budget = std::max(0.0, budget - len);
      queue_.pop_front();
      continue;
    }
    const Eigen::Vector2d p = at + d / len * budget;
    pose_ = Pose2D5::from_xy_yaw(p.x(), p.y(), std::atan2(d.y(), d.x()), z);
    return;
  }
  if (final_heading_) {
    pose_ = Pose2D5::from_xy_yaw(pose_.position.x(), pose_.position.y(), *final_heading_, z);
    final_heading_.reset();
  }
}

}  // namespace artmap
