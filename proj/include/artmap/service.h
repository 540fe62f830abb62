#pragma once

#include <atomic>
#include <filesystem>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <variant>

#include <nlohmann/json.hpp>

#include "artmap/dataset.h"
#include "artmap/pipeline.h"

namespace artmap {

struct CommandResult {
  int status = 200;  // HTTP status: 200, 400 protocol error, 404 unknown id, 409 unsupported
  nlohmann::json body;
};

// A running mapping session: a frame producer (live simulator or dataset
// replay), the perception + manager pipeline, and a stabilizer, each on its
// own thread. Commands are queued into the pipeline's order and answered
// once applied.
class LiveSession {
 public:
  // Live simulation of `scene` along the configured trajectory.
  LiveSession(PipelineConfig cfg, Scene scene);
  // Replay of a recorded dataset, paced by its timestamps.
  LiveSession(PipelineConfig cfg, std::filesystem::path dataset);
  ~LiveSession();

  LiveSession(const LiveSession&) = delete;
  LiveSession& operator=(const LiveSession&) = delete;

  void start();
  // Stops all threads. With save=true and a map path set, writes the map.
  void stop(bool save = true);

  nlohmann::json map_json() const;
  nlohmann::json state_json() const;
  CommandResult handle_command(const nlohmann::json& command);
  // Parses a request body; malformed JSON yields a 400 result.
  CommandResult handle_command_text(const std::string& body);

  EventBus& bus() { return bus_; }
  MappingPipeline& pipeline() { return *pipeline_; }
  Pose2D5 robot_pose() const;
  bool source_exhausted() const { return exhausted_; }
  double sim_time() const;

 private:
  struct Command {
    nlohmann::json body;
    std::promise<CommandResult> reply;
  };
  using Message = std::variant<Frame, std::shared_ptr<Command>>;

  void produce();
  void consume();
  void stabilize_loop();
  CommandResult apply(const nlohmann::json& cmd);
  ArtifactMap current_map() const;

  PipelineConfig cfg_;
  std::optional<Scene> scene_;
  std::unique_ptr<DatasetReader> reader_;
  Calibration calib_;
  EventBus bus_;
  std::unique_ptr<MappingPipeline> pipeline_;

  mutable std::mutex robot_mu_;
  std::unique_ptr<RobotController> robot_;
  double sim_time_ = 0.0;
  Channel<GoalCommand> goals_;

  Channel<Message> inbox_;
  std::thread producer_, consumer_, stabilizer_;
  std::atomic<bool> running_{false};
  std::atomic<bool> exhausted_{false};
  std::atomic<bool> stop_stabilizer_{false};
  std::optional<GoalCommand> last_goal_;
};

// HTTP + WebSocket front end for a LiveSession.
//   GET /map, GET /state, POST /command, GET /events (WebSocket push stream)
class ApiServer {
 public:
  ApiServer(LiveSession& session, std::string host, int port);
  ~ApiServer();

  // Binds and starts accepting. port 0 picks a free port.
  void start();
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace artmap
