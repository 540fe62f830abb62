#include <chrono>
#include <filesystem>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include "artmap/config.h"
#include "artmap/map_io.h"
#include "artmap/service.h"

using namespace artmap;
using nlohmann::json;
namespace fs = std::filesystem;
namespace beast = boost::beast;
namespace http = beast::http;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

namespace {

struct Reply {
  int status = 0;
  std::string body;
  json parsed() const { return json::parse(body); }
};

Reply request(int port, http::verb verb, const std::string& target, const std::string& body = "") {
  asio::io_context ioc;
  tcp::socket sock(ioc);
  sock.connect({asio::ip::make_address("127.0.0.1"), static_cast<unsigned short>(port)});
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, "127.0.0.1");
  req.set(http::field::content_type, "application/json");
  req.body() = body;
  req.prepare_payload();
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  beast::error_code ec;
  sock.shutdown(tcp::socket::shutdown_both, ec);
  return {static_cast<int>(res.result_int()), res.body()};
}

Reply command(int port, const json& body) {
  return request(port, http::verb::post, "/command", body.dump());
}

template <typename Pred>
bool wait_until(Pred pred, double seconds = 120.0) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return pred();
}

SceneObject object(int id, const char* label, Shape shape, Eigen::Vector3d dims, double x,
                   double y) {
  SceneObject o;
  o.id = id;
  o.class_label = label;
  o.shape = shape;
  o.dimensions = dims;
  o.center = {x, y, 0.5 * dims.z()};
  o.ground_truth_radius = bounding_radius(shape, dims);
  return o;
}

// A plant ahead of a short path, and a vase beyond mask range from that path
// but inside it from the plant's standoff point.
PipelineConfig goto_config(const fs::path& map_path) {
  PipelineConfig cfg = office_mini_config();
  cfg.service.realtime_factor = 0.0;
  cfg.service.robot_speed = 0.25;
  cfg.sensors.masks.max_range = 8.0;
  cfg.trajectory = {{{-8, 0}, {-5, 0}}, 0.5, 2.0};
  cfg.paths.map = map_path.string();
  return cfg;
}

Scene goto_scene(const PipelineConfig& cfg) {
  Scene scene;
  scene.config = cfg.scene;
  scene.objects = {object(0, "plant", Shape::kSphere, {0.7, 0.7, 0.7}, 1.0, -1.5),
                   object(1, "vase", Shape::kCylinder, {0.24, 0.24, 0.45}, 6.0, 0.5)};
  return scene;
}

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "artmap_service";
  fs::create_directories(dir);
  fs::remove(dir / name);
  return dir / name;
}

std::optional<json> stable_with_class(const json& map, const std::string& label) {
  for (const auto& a : map["artifacts"]) {
    if (a["class"] == label) return json(a);
  }
  return std::nullopt;
}

}  // namespace

TEST(LiveSession, CommandsWithoutServer) {
  auto cfg = goto_config(temp_path("direct.yaml"));
  LiveSession session(cfg, goto_scene(cfg));
  EXPECT_EQ(session.handle_command_text("{not json").status, 400);
  EXPECT_EQ(session.handle_command(json::array()).status, 400);
  EXPECT_EQ(session.handle_command({{"type", "dance"}}).status, 400);
  EXPECT_EQ(session.handle_command({{"type", "goto"}}).status, 400);
  EXPECT_EQ(session.handle_command({{"type", "goto"}, {"id", "3"}}).status, 400);
  EXPECT_EQ(session.handle_command({{"type", "goto"}, {"id", 3}}).status, 404);
  EXPECT_EQ(session.handle_command({{"type", "delete"}, {"id", 3}}).status, 404);
  EXPECT_EQ(session.handle_command({{"type", "set_class_filter"}}).status, 400);
  EXPECT_EQ(session.handle_command({{"type", "set_class_filter"}, {"classes", {1}}}).status, 400);
  const auto ok = session.handle_command({{"type", "set_class_filter"}, {"classes", {"vase"}}});
  EXPECT_EQ(ok.status, 200);
  EXPECT_EQ(session.pipeline().class_filter(), std::set<std::string>{"vase"});
  EXPECT_EQ(session.state_json()["status"], "stopped");
  EXPECT_EQ(session.state_json()["class_filter"], json::array({"vase"}));
}

TEST(LiveSession, ReplayHasNoRobot) {
  auto cfg = office_mini_config();
  cfg.scene.object_count = 2;
  cfg.scene.arena_x = cfg.scene.arena_y = 6.0;
  cfg.trajectory = {{{-1, 0}, {1, 0}}, 1.0, 1.0};
  cfg.scene.keep_out_path = cfg.trajectory.waypoints;
  cfg.service.realtime_factor = 0.0;
  const auto root = fs::temp_directory_path() / "artmap_service" / "replay";
  fs::remove_all(root);
  const Scene scene = generate_scene(cfg.scene, 1);
  TrajectorySource src(scene, cfg.trajectory, cfg.sensors, 1);
  write_dataset(root, cfg.sensors.calibration(), scene, src);

  LiveSession session(cfg, root);
  session.start();
  ASSERT_TRUE(wait_until([&] { return session.source_exhausted(); }));
  EXPECT_TRUE(wait_until([&] { return session.state_json()["frames"] == 3; }));
  EXPECT_EQ(session.state_json()["status"], "finished");
  EXPECT_EQ(session.state_json()["source"], "replay");
  EXPECT_EQ(session.handle_command({{"type", "goto"}, {"id", 0}}).status, 409);
  session.stop(false);
}

TEST(ApiServer, HttpRoutes) {
  const auto map_path = temp_path("routes.yaml");
  auto cfg = goto_config(map_path);
  LiveSession session(cfg, goto_scene(cfg));
  ApiServer server(session, "127.0.0.1", 0);
  server.start();
  const int port = server.port();
  ASSERT_GT(port, 0);
  session.start();

  const auto map = request(port, http::verb::get, "/map");
  EXPECT_EQ(map.status, 200);
  EXPECT_TRUE(map.parsed().contains("artifacts"));
  EXPECT_TRUE(map.parsed().contains("meta"));
  const auto state = request(port, http::verb::get, "/state?verbose=1");
  EXPECT_EQ(state.status, 200);
  EXPECT_EQ(state.parsed()["source"], "simulator");
  EXPECT_TRUE(state.parsed()["robot_pose"].contains("yaw"));

  EXPECT_EQ(request(port, http::verb::post, "/command", "{oops").status, 400);
  EXPECT_EQ(command(port, {{"type", "goto"}, {"id", 12345}}).status, 404);
  EXPECT_EQ(command(port, {{"type", "goto"}, {"id", 0}, {"margin", -1}}).status, 404);
  EXPECT_EQ(request(port, http::verb::delete_, "/map").status, 405);
  EXPECT_EQ(request(port, http::verb::get, "/command").status, 405);
  EXPECT_EQ(request(port, http::verb::get, "/events").status, 426);
  EXPECT_EQ(request(port, http::verb::get, "/nothing").status, 404);
  EXPECT_EQ(request(port, http::verb::options, "/command").status, 204);

  const auto saved = command(port, {{"type", "save"}});
  EXPECT_EQ(saved.status, 200);
  EXPECT_TRUE(fs::exists(map_path));
  EXPECT_EQ(command(port, {{"type", "save"}, {"path", 5}}).status, 400);

  server.stop();
  session.stop(false);
}

TEST(ApiServer, EventStreamStartsWithSnapshot) {
  auto cfg = goto_config(temp_path("events.yaml"));
  LiveSession session(cfg, goto_scene(cfg));
  ApiServer server(session, "127.0.0.1", 0);
  server.start();

  asio::io_context ioc;
  tcp::socket sock(ioc);
  sock.connect({asio::ip::make_address("127.0.0.1"), static_cast<unsigned short>(server.port())});
  beast::websocket::stream<tcp::socket&> ws(sock);
  ws.handshake("127.0.0.1", "/events");
  beast::flat_buffer buf;
  ws.read(buf);
  const json snapshot = json::parse(beast::buffers_to_string(buf.data()));
  buf.consume(buf.size());
  EXPECT_EQ(snapshot["type"], "snapshot");
  EXPECT_TRUE(snapshot["map"].contains("artifacts"));
  EXPECT_TRUE(snapshot["state"].contains("robot_pose"));

  session.start();
  std::vector<json> events;
  while (events.size() < 6) {
    ws.read(buf);
    events.push_back(json::parse(beast::buffers_to_string(buf.data())));
    buf.consume(buf.size());
  }
  EXPECT_EQ(events[0]["type"], "session_start");
  for (size_t i = 1; i < events.size(); ++i) {
    EXPECT_EQ(events[i]["seq"].get<uint64_t>(), events[i - 1]["seq"].get<uint64_t>() + 1);
  }
  const bool saw_frame = std::any_of(events.begin(), events.end(),
                                     [](const json& e) { return e["type"] == "frame"; });
  EXPECT_TRUE(saw_frame);
  ws.close(beast::websocket::close_code::normal);
  server.stop();
  session.stop(false);
}

TEST(ApiServer, GoToDeleteAndSave) {
  const auto map_path = temp_path("goto.yaml");
  auto cfg = goto_config(map_path);
  LiveSession session(cfg, goto_scene(cfg));
  ApiServer server(session, "127.0.0.1", 0);
  server.start();
  const int port = server.port();
  session.start();

  // Drive the scripted path; the plant becomes stable, the vase stays unseen.
  ASSERT_TRUE(wait_until([&] { return session.source_exhausted(); }));
  session.pipeline().stabilize_now();
  const json before = request(port, http::verb::get, "/map").parsed();
  const auto plant = stable_with_class(before, "plant");
  ASSERT_TRUE(plant) << before.dump();
  EXPECT_FALSE(stable_with_class(before, "vase"));
  const Pose2D5 start = session.robot_pose();

  const auto go = command(port, {{"type", "goto"}, {"id", (*plant)["id"]}});
  ASSERT_EQ(go.status, 200) << go.body;
  const json goal = go.parsed()["goal"];
  EXPECT_FALSE(goal["inside_ring"].get<bool>());
  ASSERT_TRUE(wait_until([&] {
    const Pose2D5 p = session.robot_pose();
    return session.source_exhausted() && p.position != start.position;
  }));

  // Standoff point on the approach line, facing the artifact.
  const Pose2D5 end = session.robot_pose();
  EXPECT_NEAR(end.position.x(), goal["x"].get<double>(), cfg.service.goal_tolerance);
  EXPECT_NEAR(end.position.y(), goal["y"].get<double>(), cfg.service.goal_tolerance);
  EXPECT_NEAR(end.yaw(), goal["heading"].get<double>(), 1e-9);
  const Eigen::Vector2d centroid((*plant)["position"]["x"], (*plant)["position"]["y"]);
  EXPECT_NEAR((end.position.head<2>() - centroid).norm(),
              (*plant)["radius"].get<double>() + cfg.run.goal_margin, cfg.service.goal_tolerance);
  const json state = request(port, http::verb::get, "/state").parsed();
  EXPECT_EQ(state["goal"]["id"], (*plant)["id"]);

  // The vase came into range during the drive.
  session.pipeline().stabilize_now();
  const json after = request(port, http::verb::get, "/map").parsed();
  const auto vase = stable_with_class(after, "vase");
  ASSERT_TRUE(vase) << after.dump();

  const auto del = command(port, {{"type", "delete"}, {"id", (*vase)["id"]}});
  EXPECT_EQ(del.status, 200);
  EXPECT_EQ(command(port, {{"type", "delete"}, {"id", (*vase)["id"]}}).status, 404);
  EXPECT_FALSE(stable_with_class(request(port, http::verb::get, "/map").parsed(), "vase"));
  ASSERT_EQ(command(port, {{"type", "save"}}).status, 200);
  const ArtifactMap saved = load_map(map_path);
  for (const auto& a : saved.artifacts) EXPECT_NE(a.class_label, "vase");
  EXPECT_FALSE(saved.artifacts.empty());

  server.stop();
  session.stop(true);
  EXPECT_TRUE(fs::exists(map_path));
}
