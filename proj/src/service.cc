#include "artmap/service.h"

#include <chrono>
#include <list>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "artmap/error.h"
#include "artmap/map_io.h"

namespace artmap {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// LiveSession

LiveSession::LiveSession(PipelineConfig cfg, Scene scene)
    : cfg_(std::move(cfg)), scene_(std::move(scene)) {
  cfg_.validate();
  calib_ = cfg_.sensors.calibration();
  const auto& wps = cfg_.trajectory.waypoints;
  if (wps.empty()) throw ConfigError("live session needs at least one waypoint");
  double yaw = 0.0;
  if (wps.size() > 1) {
    const Eigen::Vector2d d = wps[1] - wps[0];
    yaw = std::atan2(d.y(), d.x());
  }
  robot_ = std::make_unique<RobotController>(
      Pose2D5::from_xy_yaw(wps[0].x(), wps[0].y(), yaw), cfg_.service.robot_speed);
  robot_->set_waypoints({wps.begin() + 1, wps.end()});
  pipeline_ = std::make_unique<MappingPipeline>(cfg_, calib_, &bus_);
}

LiveSession::LiveSession(PipelineConfig cfg, std::filesystem::path dataset)
    : cfg_(std::move(cfg)), reader_(std::make_unique<DatasetReader>(std::move(dataset))) {
  cfg_.validate();
  calib_ = reader_->calibration();
  pipeline_ = std::make_unique<MappingPipeline>(cfg_, calib_, &bus_);
}

LiveSession::~LiveSession() { stop(false); }

void LiveSession::start() {
  if (running_.exchange(true)) return;
  bus_.publish({{"type", "session_start"},
                {"source", scene_ ? "simulator" : "replay"},
                {"meta", {{"run_id", pipeline_->metadata().run_id}}}});
  consumer_ = std::thread([this] { consume(); });
  producer_ = std::thread([this] { produce(); });
  stabilizer_ = std::thread([this] { stabilize_loop(); });
}

void LiveSession::stop(bool save) {
  if (!running_.exchange(false)) return;
  goals_.close();
  if (producer_.joinable()) producer_.join();
  inbox_.close();
  if (consumer_.joinable()) consumer_.join();
  stop_stabilizer_ = true;
  if (stabilizer_.joinable()) stabilizer_.join();
  if (save && !cfg_.paths.map.empty()) {
    save_map(cfg_.paths.map, current_map());
  }
}

double LiveSession::sim_time() const {
  std::lock_guard lock(robot_mu_);
  return sim_time_;
}

Pose2D5 LiveSession::robot_pose() const {
  {
    std::lock_guard lock(robot_mu_);
    if (robot_) return robot_->pose();
  }
  return pipeline_->last_pose().value_or(Pose2D5{});
}

void LiveSession::produce() {
  const auto wall0 = Clock::now();
  auto pace = [&](double t, double speed) {
    if (speed <= 0.0) return;
    std::this_thread::sleep_until(wall0 + std::chrono::duration_cast<Clock::duration>(
                                              std::chrono::duration<double>(t / speed)));
  };

  if (reader_) {
    try {
      while (running_) {
        auto f = reader_->next();
        if (!f) break;
        pace(f->timestamp, cfg_.run.replay_speed * std::max(cfg_.service.realtime_factor, 0.0));
        {
          std::lock_guard lock(robot_mu_);
          sim_time_ = f->timestamp;
        }
        if (!inbox_.push(std::move(*f))) break;
      }
    } catch (const Error& e) {
      bus_.publish({{"type", "error"}, {"message", e.what()}});
    }
    exhausted_ = true;
    return;
  }

  const double dt = 1.0 / cfg_.trajectory.rate;
  int index = 0;
  while (running_) {
    while (auto g = goals_.try_pop()) {
      std::lock_guard lock(robot_mu_);
      robot_->go_to(*g);
    }
    Pose2D5 pose;
    double t;
    {
      std::lock_guard lock(robot_mu_);
      if (index > 0) {
        if (robot_->idle()) {
          exhausted_ = true;
        } else {
          exhausted_ = false;
          robot_->step(dt);
          sim_time_ += dt;
        }
      }
      pose = robot_->pose();
      t = sim_time_;
    }
    if (index > 0 && exhausted_) {
      // Nothing to do until a new goal arrives.
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
      continue;
    }
    ++index;
    Frame f = render_frame(*scene_, pose, cfg_.sensors,
                           mix_seed(cfg_.run.seed, 1000 + static_cast<uint64_t>(index)),
                           index, t);
    pace(t, cfg_.service.realtime_factor);
    if (!inbox_.push(std::move(f))) break;
  }
}

void LiveSession::consume() {
  while (auto msg = inbox_.pop()) {
    if (auto* f = std::get_if<Frame>(&*msg)) {
      try {
        pipeline_->process(*f);
      } catch (const Error& e) {
        bus_.publish({{"type", "error"}, {"index", f->index}, {"message", e.what()}});
      }
    } else {
      auto& cmd = std::get<std::shared_ptr<Command>>(*msg);
      CommandResult r;
      try {
        r = apply(cmd->body);
      } catch (const std::exception& e) {
        r = {500, {{"ok", false}, {"error", e.what()}}};
      }
      cmd->reply.set_value(std::move(r));
    }
  }
}

void LiveSession::stabilize_loop() {
  const double period = cfg_.manager.stability_period;
  const double rt = cfg_.service.realtime_factor;
  const auto wall_period = std::chrono::duration<double>(rt > 0.0 ? period / rt : period);
  while (!stop_stabilizer_) {
    std::this_thread::sleep_for(std::chrono::duration_cast<Clock::duration>(wall_period));
    pipeline_->stabilize_now();
  }
}

ArtifactMap LiveSession::current_map() const {
  return finalize_merge(pipeline_->manager().stable_map(pipeline_->metadata()));
}

json LiveSession::map_json() const {
  return map_to_json(pipeline_->manager().stable_map(pipeline_->metadata()));
}

json LiveSession::state_json() const {
  const auto snap = pipeline_->manager().snapshot();
  json goal = nullptr;
  std::string status;
  {
    std::lock_guard lock(robot_mu_);
    if (robot_ && robot_->goal()) {
      const auto& g = *robot_->goal();
      goal = {{"id", g.artifact_id}, {"x", g.x}, {"y", g.y}, {"heading", g.heading}};
    }
  }
  if (!running_) {
    status = "stopped";
  } else if (exhausted_) {
    status = reader_ ? "finished" : "idle";
  } else {
    status = "running";
  }
  return {{"robot_pose", pose_to_json(robot_pose())},
          {"status", status},
          {"source", scene_ ? "simulator" : "replay"},
          {"time", pipeline_->clock()},
          {"frames", pipeline_->frames()},
          {"stable", snap.stable.size()},
          {"temporary", snap.temporary.size()},
          {"class_filter", pipeline_->class_filter()},
          {"goal", goal}};
}

CommandResult LiveSession::handle_command_text(const std::string& body) {
  json cmd;
  try {
    cmd = json::parse(body);
  } catch (const json::exception& e) {
    return {400, {{"ok", false}, {"error", std::string("malformed JSON: ") + e.what()}}};
  }
  return handle_command(cmd);
}

CommandResult LiveSession::handle_command(const json& command) {
  if (!command.is_object() || !command.contains("type") || !command["type"].is_string()) {
    return {400, {{"ok", false}, {"error", "command must be an object with a string 'type'"}}};
  }
  if (!running_) {
    // Not started: apply directly on the caller's thread.
    return apply(command);
  }
  auto cmd = std::make_shared<Command>();
  cmd->body = command;
  auto fut = cmd->reply.get_future();
  if (!inbox_.push(cmd)) return {503, {{"ok", false}, {"error", "session stopped"}}};
  return fut.get();
}

CommandResult LiveSession::apply(const json& cmd) {
  const std::string type = cmd.at("type").get<std::string>();
  auto need_id = [&](int* id) -> std::optional<CommandResult> {
    if (!cmd.contains("id") || !cmd["id"].is_number_integer()) {
      return CommandResult{400, {{"ok", false}, {"error", type + " needs an integer 'id'"}}};
    }
    *id = cmd["id"].get<int>();
    return std::nullopt;
  };

  if (type == "goto") {
    int id = 0;
    if (auto err = need_id(&id)) return *err;
    if (!robot_) return {409, {{"ok", false}, {"error", "goto needs a live simulator"}}};
    const auto art = pipeline_->manager().find(id);
    if (!art || art->state != ArtifactState::kStable) {
      return {404, {{"ok", false}, {"error", "no stable artifact " + std::to_string(id)}}};
    }
    double margin = cfg_.run.goal_margin;
    if (cmd.contains("margin")) {
      if (!cmd["margin"].is_number() || cmd["margin"].get<double>() < 0.0) {
        return {400, {{"ok", false}, {"error", "margin must be a number >= 0"}}};
      }
      margin = cmd["margin"].get<double>();
    }
    const GoalCommand g = compute_goal(to_map_artifact(*art), robot_pose(), margin);
    goals_.push(g);
    const json goal = {{"id", g.artifact_id}, {"x", g.x}, {"y", g.y}, {"heading", g.heading},
                       {"inside_ring", g.inside_ring}};
    bus_.publish({{"type", "goal"}, {"goal", goal}});
    return {200, {{"ok", true}, {"goal", goal}}};
  }
  if (type == "delete") {
    int id = 0;
    if (auto err = need_id(&id)) return *err;
    if (!pipeline_->remove(id)) {
      return {404, {{"ok", false}, {"error", "unknown artifact " + std::to_string(id)}}};
    }
    bus_.publish({{"type", "deleted"}, {"id", id}});
    return {200, {{"ok", true}, {"deleted", id}}};
  }
  if (type == "set_class_filter") {
    if (!cmd.contains("classes") || !cmd["classes"].is_array()) {
      return {400, {{"ok", false}, {"error", "set_class_filter needs a 'classes' list"}}};
    }
    std::set<std::string> classes;
    for (const auto& c : cmd["classes"]) {
      if (!c.is_string()) return {400, {{"ok", false}, {"error", "class names must be strings"}}};
      classes.insert(c.get<std::string>());
    }
    pipeline_->set_class_filter(classes);
    bus_.publish({{"type", "class_filter"}, {"classes", classes}});
    return {200, {{"ok", true}, {"classes", classes}}};
  }
  if (type == "save") {
    std::string path = cfg_.paths.map;
    if (cmd.contains("path")) {
      if (!cmd["path"].is_string()) return {400, {{"ok", false}, {"error", "path must be a string"}}};
      path = cmd["path"].get<std::string>();
    }
    if (path.empty()) return {400, {{"ok", false}, {"error", "no map path configured"}}};
    const ArtifactMap map = current_map();
    save_map(path, map);
    bus_.publish({{"type", "saved"}, {"path", path}, {"artifacts", map.artifacts.size()}});
    return {200, {{"ok", true}, {"path", path}, {"artifacts", map.artifacts.size()}}};
  }
  return {400, {{"ok", false}, {"error", "unknown command type '" + type + "'"}}};
}

// ---------------------------------------------------------------------------
// ApiServer

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

struct ApiServer::Impl {
  LiveSession& session;
  std::string host;
  int port;
  asio::io_context ioc;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::thread accept_thread;
  std::atomic<bool> stopping{false};

  std::mutex conn_mu;
  std::list<std::thread> threads;
  std::list<std::shared_ptr<tcp::socket>> sockets;
  std::list<std::shared_ptr<Channel<std::string>>> streams;

  Impl(LiveSession& s, std::string h, int p) : session(s), host(std::move(h)), port(p) {}

  void accept_loop() {
    while (!stopping) {
      auto sock = std::make_shared<tcp::socket>(ioc);
      beast::error_code ec;
      acceptor->accept(*sock, ec);
      if (ec == asio::error::would_block || ec == asio::error::try_again) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        continue;
      }
      if (ec) continue;
      sock->non_blocking(false);
      std::lock_guard lock(conn_mu);
      if (stopping) break;
      sockets.push_back(sock);
      threads.emplace_back([this, sock] { serve(sock); });
    }
  }

  http::response<http::string_body> reply(const http::request<http::string_body>& req,
                                          http::status status, const std::string& body,
                                          const char* type = "application/json") {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::server, "artmap");
    res.set(http::field::content_type, type);
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(req.keep_alive());
    res.body() = body;
    res.prepare_payload();
    return res;
  }

  void serve(std::shared_ptr<tcp::socket> sock) {
    beast::flat_buffer buffer;
    beast::error_code ec;
    while (!stopping) {
      http::request<http::string_body> req;
      http::read(*sock, buffer, req, ec);
      if (ec) break;
      const std::string target(req.target());
      const std::string path = target.substr(0, target.find('?'));

      if (path == "/events" && websocket::is_upgrade(req)) {
        stream_events(*sock, std::move(req));
        break;
      }
      http::response<http::string_body> res;
      if (req.method() == http::verb::options) {
        res = reply(req, http::status::no_content, "");
        res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
        res.set(http::field::access_control_allow_headers, "Content-Type");
      } else if (path == "/map" && req.method() == http::verb::get) {
        res = reply(req, http::status::ok, session.map_json().dump());
      } else if (path == "/state" && req.method() == http::verb::get) {
        res = reply(req, http::status::ok, session.state_json().dump());
      } else if (path == "/command" && req.method() == http::verb::post) {
        const CommandResult r = session.handle_command_text(req.body());
        res = reply(req, static_cast<http::status>(r.status), r.body.dump());
      } else if (path == "/events") {
        res = reply(req, http::status::upgrade_required,
                    json{{"error", "/events needs a WebSocket upgrade"}}.dump());
      } else if (path == "/map" || path == "/state" || path == "/command") {
        res = reply(req, http::status::method_not_allowed,
                    json{{"error", "method not allowed"}}.dump());
      } else {
        res = reply(req, http::status::not_found, json{{"error", "not found"}}.dump());
      }
      const bool keep = res.keep_alive();
      http::write(*sock, res, ec);
      if (ec || !keep) break;
    }
    sock->shutdown(tcp::socket::shutdown_both, ec);
  }

  void stream_events(tcp::socket& sock, http::request<http::string_body> req) {
    websocket::stream<tcp::socket&> ws(sock);
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);
    auto queue = std::make_shared<Channel<std::string>>();
    {
      std::lock_guard lock(conn_mu);
      streams.push_back(queue);
    }
    const int token = session.bus().subscribe(
        [queue](const json& ev) { queue->push(ev.dump()); },
        [this] {
          return json{{"type", "snapshot"},
                      {"map", session.map_json()},
                      {"state", session.state_json()}};
        });
    // Reader thread only notices the client going away.
    std::thread reader([&ws, queue] {
      beast::flat_buffer buf;
      beast::error_code rec;
      while (true) {
        ws.read(buf, rec);
        if (rec) break;
        buf.consume(buf.size());
      }
      queue->close();
    });
    while (auto msg = queue->pop()) {
      ws.write(asio::buffer(*msg), ec);
      if (ec) break;
    }
    session.bus().unsubscribe(token);
    queue->close();
    ws.close(websocket::close_code::going_away, ec);
    sock.shutdown(tcp::socket::shutdown_both, ec);
    reader.join();
    std::lock_guard lock(conn_mu);
    streams.remove(queue);
  }
};

ApiServer::ApiServer(LiveSession& session, std::string host, int port)
    : impl_(std::make_unique<Impl>(session, std::move(host), port)), port_(port) {}

ApiServer::~ApiServer() { stop(); }

void ApiServer::start() {
  auto& im = *impl_;
  const auto addr = asio::ip::make_address(im.host);
  im.acceptor = std::make_unique<tcp::acceptor>(im.ioc);
  tcp::endpoint ep(addr, static_cast<unsigned short>(im.port));
  im.acceptor->open(ep.protocol());
  im.acceptor->set_option(asio::socket_base::reuse_address(true));
  im.acceptor->bind(ep);
  im.acceptor->listen();
  im.acceptor->non_blocking(true);
  port_ = im.acceptor->local_endpoint().port();
  im.accept_thread = std::thread([&im] { im.accept_loop(); });
}

void ApiServer::stop() {
  if (!impl_ || !impl_->acceptor) return;
  auto& im = *impl_;
  im.stopping = true;
  if (im.accept_thread.joinable()) im.accept_thread.join();
  std::list<std::thread> threads;
  {
    std::lock_guard lock(im.conn_mu);
    for (auto& q : im.streams) q->close();
    for (auto& s : im.sockets) {
      beast::error_code ec;
      s->shutdown(tcp::socket::shutdown_both, ec);
    }
    threads.swap(im.threads);
  }
  for (auto& t : threads) t.join();
  beast::error_code ec;
  im.acceptor->close(ec);
  im.acceptor.reset();
}

}  // namespace artmap
