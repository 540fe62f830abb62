#include "artmap/config.h"

#include <cmath>
#include <fstream>
#include <optional>
#include <numbers>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "artmap/digest.h"
#include "artmap/pipeline.h"
#include "artmap/error.h"

namespace artmap {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Reads a YAML mapping, remembering which keys were consumed so leftovers
// can be reported.
class Reader {
 public:
  Reader(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError(where() + " must be a mapping");
    }
  }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0 || !node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError("unknown key '" + prefix() + key + "'");
    }
  }

  template <typename T>
  void field(const char* key, T& value) {
    const auto found = take(key);
    if (!found) return;
    const YAML::Node& n = *found;
    try {
      value = n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("bad value for '" + prefix() + key + "'");
    }
  }

  void degrees(const char* key, double& radians) {
    double deg = radians / kDeg;
    field(key, deg);
    radians = deg * kDeg;
  }

  void vec2(const char* key, std::array<double, 2>& v) { numbers(key, v.data(), 2); }
  void vec3(const char* key, Eigen::Vector3d& v) { numbers(key, v.data(), 3); }

  void extrinsics(const char* key, Extrinsics& e) {
    object(key, [&](Reader& r) {
      double rot[9];
      for (int k = 0; k < 9; ++k) rot[k] = e.rotation(k / 3, k % 3);
      r.numbers("rotation", rot, 9);
      for (int k = 0; k < 9; ++k) e.rotation(k / 3, k % 3) = rot[k];
      r.vec3("translation", e.translation);
    });
  }

  template <typename F>
  void object(const char* key, F&& f) {
    const auto found = take(key);
    if (!found) return;
    const YAML::Node& n = *found;
    Reader sub(n, prefix() + key);
    f(sub);
  }

  void mode(const char* key, SensorMode& m) {
    std::string s(to_string(m));
    field(key, s);
    m = sensor_mode_from_string(s);
  }

  void string_set(const char* key, std::set<std::string>& out) {
    const auto found = take(key);
    if (!found) return;
    const YAML::Node& n = *found;
    if (!n.IsSequence()) throw ConfigError("'" + prefix() + key + "' must be a list");
    out.clear();
    for (const auto& item : n) out.insert(item.as<std::string>());
  }

  void class_specs(const char* key, std::vector<ObjectClassSpec>& out) {
    const auto found = take(key);
    if (!found) return;
    const YAML::Node& n = *found;
    if (!n.IsSequence()) throw ConfigError("'" + prefix() + key + "' must be a list");
    out.clear();
    for (size_t i = 0; i < n.size(); ++i) {
      ObjectClassSpec spec;
      std::string shape = "sphere";
      Reader r(n[i], prefix() + key + "[" + std::to_string(i) + "]");
      r.field("label", spec.label);
      r.field("shape", shape);
      r.vec3("dimensions", spec.dimensions);
      spec.shape = shape_from_string(shape);
      out.push_back(spec);
    }
  }

  void waypoints(const char* key, std::vector<Eigen::Vector2d>& out) {
    const auto found = take(key);
    if (!found) return;
    const YAML::Node& n = *found;
    if (!n.IsSequence()) throw ConfigError("'" + prefix() + key + "' must be a list");
    out.clear();
    for (const auto& p : n) {
      if (!p.IsSequence() || p.size() != 2) {
        throw ConfigError("'" + prefix() + key + "' entries must be [x, y]");
      }
      try {
        out.emplace_back(p[0].as<double>(), p[1].as<double>());
      } catch (const YAML::Exception&) {
        throw ConfigError("bad waypoint in '" + prefix() + key + "'");
      }
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }
  std::string prefix() const { return path_.empty() ? "" : path_ + "."; }

  // Empty when the key is absent or null.
  std::optional<YAML::Node> take(const char* key) {
    seen_.insert(key);
    if (!node_ || !node_.IsMap()) return std::nullopt;
    YAML::Node n = node_[key];
    if (!n || n.IsNull()) return std::nullopt;
    return n;
  }

  void numbers(const char* key, double* out, size_t count) {
    const auto found = take(key);
    if (!found) return;
    const YAML::Node& n = *found;
    if (!n.IsSequence() || n.size() != count) {
      throw ConfigError("'" + prefix() + key + "' needs " + std::to_string(count) + " numbers");
    }
    try {
      for (size_t k = 0; k < count; ++k) out[k] = n[k].as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError("bad number in '" + prefix() + key + "'");
    }
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

// Mirror of Reader that emits JSON.
class Writer {
 public:
  explicit Writer(json& out) : out_(out) { out_ = json::object(); }

  template <typename T>
  void field(const char* key, T& value) { out_[key] = value; }
  void degrees(const char* key, double& radians) {
    out_[key] = std::round(radians / kDeg * 1e9) / 1e9;
  }
  void vec2(const char* key, std::array<double, 2>& v) { out_[key] = {v[0], v[1]}; }
  void vec3(const char* key, Eigen::Vector3d& v) { out_[key] = {v.x(), v.y(), v.z()}; }
  void extrinsics(const char* key, Extrinsics& e) {
    json rot = json::array();
    for (int k = 0; k < 9; ++k) rot.push_back(e.rotation(k / 3, k % 3));
    out_[key] = {{"rotation", rot},
                 {"translation", {e.translation.x(), e.translation.y(), e.translation.z()}}};
  }
  template <typename F>
  void object(const char* key, F&& f) {
    json sub;
    Writer w(sub);
    f(w);
    out_[key] = sub;
  }
  void mode(const char* key, SensorMode& m) { out_[key] = std::string(to_string(m)); }
  void string_set(const char* key, std::set<std::string>& s) { out_[key] = s; }
  void class_specs(const char* key, std::vector<ObjectClassSpec>& specs) {
    json arr = json::array();
    for (const auto& c : specs) {
      arr.push_back({{"label", c.label},
                     {"shape", std::string(to_string(c.shape))},
                     {"dimensions", {c.dimensions.x(), c.dimensions.y(), c.dimensions.z()}}});
    }
    out_[key] = arr;
  }
  void waypoints(const char* key, std::vector<Eigen::Vector2d>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.x(), p.y()});
    out_[key] = arr;
  }

 private:
  json& out_;
};

template <typename V>
void visit_filter(V& v, FilterParams& f) {
  v.field("voxel_leaf", f.voxel_leaf);
  v.field("neighbor_radius", f.neighbor_radius);
  v.field("min_neighbor_fraction", f.min_neighbor_fraction);
  v.field("min_neighbors_floor", f.min_neighbors_floor);
  v.field("downsample", f.downsample);
}

template <typename V>
void visit(V& v, PipelineConfig& c) {
  v.mode("mode", c.perception.mode);
  v.object("fusion", [&](V& f) {
    f.field("min_c", c.perception.fusion.min_c);
    f.field("acc_c", c.perception.fusion.acc_c);
    f.field("max_c", c.perception.fusion.max_c);
  });
  v.object("filters", [&](V& f) {
    f.object("camera", [&](V& s) { visit_filter(s, c.perception.camera_filter); });
    f.object("lidar", [&](V& s) { visit_filter(s, c.perception.lidar_filter); });
    f.field("confidence_threshold", c.perception.confidence_threshold);
  });
  v.object("manager", [&](V& m) {
    m.field("window", c.manager.window);
    m.field("stability_period", c.manager.stability_period);
    m.field("stability_use_stddev", c.manager.stability_use_stddev);
  });
  v.string_set("classes", c.classes);
  v.object("sensors", [&](V& s) {
    auto& cam = c.sensors.camera;
    s.object("camera", [&](V& k) {
      k.field("fx", cam.intrinsics.fx);
      k.field("fy", cam.intrinsics.fy);
      k.field("px", cam.intrinsics.px);
      k.field("py", cam.intrinsics.py);
      k.field("width", cam.intrinsics.width);
      k.field("height", cam.intrinsics.height);
      k.extrinsics("robot_from_camera", cam.robot_from_camera);
      k.field("min_range", cam.min_range);
      k.field("max_range", cam.max_range);
      k.field("noise_a", cam.noise_a);
      k.field("dropout", cam.dropout);
      k.field("depth_bias", cam.depth_bias);
      k.field("edge_width", cam.edge_width);
      k.field("edge_jump", cam.edge_jump);
      k.field("flying_pixel_prob", cam.flying_pixel_prob);
    });
    auto& lid = c.sensors.lidar;
    s.object("lidar", [&](V& k) {
      k.field("rings", lid.rings);
      k.degrees("vertical_fov_deg", lid.vertical_fov);
      k.degrees("horizontal_resolution_deg", lid.horizontal_resolution);
      k.field("range_noise", lid.range_noise);
      k.field("max_range", lid.max_range);
      k.extrinsics("robot_from_lidar", lid.robot_from_lidar);
      k.degrees("extrinsic_yaw_error_deg", lid.extrinsic_yaw_error);
    });
    auto& mk = c.sensors.masks;
    s.object("masks", [&](V& k) {
      k.field("erosion", mk.erosion);
      k.field("label_swap", mk.label_swap);
      k.field("min_pixels", mk.min_pixels);
      k.field("max_range", mk.max_range);
    });
    s.field("pose_noise", c.sensors.pose_noise);
  });
  v.object("scene", [&](V& s) {
    std::array<double, 2> arena{c.scene.arena_x, c.scene.arena_y};
    s.vec2("arena", arena);
    c.scene.arena_x = arena[0];
    c.scene.arena_y = arena[1];
    s.field("floor", c.scene.floor);
    s.field("walls", c.scene.walls);
    s.field("wall_height", c.scene.wall_height);
    s.field("object_count", c.scene.object_count);
    s.class_specs("objects", c.scene.classes);
    s.field("min_gap", c.scene.min_gap);
    s.field("path_clearance", c.scene.path_clearance);
    s.field("wall_margin", c.scene.wall_margin);
    s.field("max_attempts", c.scene.max_attempts);
  });
  v.object("trajectory", [&](V& t) {
    t.waypoints("waypoints", c.trajectory.waypoints);
    t.field("speed", c.trajectory.speed);
    t.field("rate", c.trajectory.rate);
  });
  v.object("evaluation", [&](V& e) { e.field("xy_only", c.evaluation.xy_only); });
  v.object("run", [&](V& r) {
    r.field("seed", c.run.seed);
    r.field("clock_epoch", c.run.clock_epoch);
    r.field("replay_speed", c.run.replay_speed);
    r.field("goal_margin", c.run.goal_margin);
  });
  v.object("paths", [&](V& p) {
    p.field("dataset", c.paths.dataset);
    p.field("map", c.paths.map);
  });
  v.object("service", [&](V& s) {
    s.field("host", c.service.host);
    s.field("port", c.service.port);
    s.field("realtime_factor", c.service.realtime_factor);
    s.field("robot_speed", c.service.robot_speed);
    s.field("goal_tolerance", c.service.goal_tolerance);
  });
}

}  // namespace

void PipelineConfig::validate() const {
  try {
    perception.validate();
    manager.validate();
    sensors.validate();
    scene.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(trajectory.speed > 0.0 && trajectory.rate > 0.0)) {
    throw ConfigError("trajectory speed and rate must be positive");
  }
  if (trajectory.waypoints.size() == 1) {
    throw ConfigError("a trajectory needs at least two waypoints");
  }
  iso_after(run.clock_epoch, 0.0);
  if (!(run.replay_speed > 0.0)) throw ConfigError("run.replay_speed must be positive");
  if (run.goal_margin < 0.0) throw ConfigError("run.goal_margin must be >= 0");
  if (service.port < 0 || service.port > 65535) throw ConfigError("service.port out of range");
  if (!(service.robot_speed > 0.0)) throw ConfigError("service.robot_speed must be positive");
  // Sensor limits and the fusion gate describe the same camera.
  if (perception.fusion.max_c > sensors.camera.max_range) {
    throw ConfigError("fusion.max_c exceeds the camera's max_range");
  }
}

PipelineConfig office_mini_config() {
  PipelineConfig c;
  c.classes = {"couch", "person", "plant", "vase"};

  c.scene.arena_x = 18.0;
  c.scene.arena_y = 18.0;
  c.scene.floor = true;
  c.scene.walls = true;
  c.scene.object_count = 20;
  c.scene.classes = {{"vase", Shape::kCylinder, {0.24, 0.24, 0.45}},
                     {"couch", Shape::kBox, {1.6, 0.9, 0.8}},
                     {"plant", Shape::kSphere, {0.7, 0.7, 0.7}},
                     {"person", Shape::kCylinder, {0.5, 0.5, 1.7}}};
  c.scene.min_gap = 0.5;
  c.scene.path_clearance = 0.6;

  // Serpentine sweep over four rows.
  c.trajectory.waypoints = {{-7, -6}, {7, -6}, {7, -2}, {-7, -2},
                            {-7, 2},  {7, 2},  {7, 6},  {-7, 6}};
  c.trajectory.speed = 0.5;
  c.trajectory.rate = 2.0;
  c.scene.keep_out_path = c.trajectory.waypoints;

  // Camera on a mast, lidar below it on the same vertical axis.
  c.sensors.camera.robot_from_camera.translation = {0.2, 0.0, 0.7};
  c.sensors.lidar.robot_from_lidar.translation = {0.2, 0.0, 0.35};
  c.sensors.camera.depth_bias = 0.01;
  c.sensors.lidar.extrinsic_yaw_error = 0.3 * kDeg;
  return c;
}

PipelineConfig parse_config(const std::string& yaml_text) {
  PipelineConfig cfg = office_mini_config();
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  {
    Reader r(root, "");
    visit(r, cfg);
  }
  cfg.scene.keep_out_path = cfg.trajectory.waypoints;
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  json out;
  Writer w(out);
  visit(w, copy);
  return out;
}

std::string config_digest(const PipelineConfig& cfg) {
  return hex64(fnv1a64(config_to_json(cfg).dump()));
}

}  // namespace artmap
