#include "artmap/dataset.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "artmap/error.h"

namespace artmap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw IngestionError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IngestionError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IngestionError("cannot write " + path.string());
}

std::string frame_dir_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", index);
  return buf;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

json scene_to_json(const Scene& scene) {
  json objs = json::array();
  for (const auto& o : scene.objects) {
    objs.push_back({{"id", o.id},
                    {"class", o.class_label},
                    {"shape", std::string(to_string(o.shape))},
                    {"center", vec_json(o.center)},
                    {"dimensions", vec_json(o.dimensions)},
                    {"yaw", o.yaw},
                    {"radius", o.ground_truth_radius}});
  }
  return {{"arena", {scene.config.arena_x, scene.config.arena_y}}, {"objects", objs}};
}

std::vector<SceneObject> scene_objects_from_json(const json& j) {
  std::vector<SceneObject> out;
  try {
    for (const auto& o : j.at("objects")) {
      SceneObject s;
      s.id = o.at("id").get<int>();
      s.class_label = o.at("class").get<std::string>();
      s.shape = shape_from_string(o.at("shape").get<std::string>());
      s.center = vec_from(o.at("center"));
      s.dimensions = vec_from(o.at("dimensions"));
      s.yaw = o.at("yaw").get<double>();
      s.ground_truth_radius = o.at("radius").get<double>();
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw IngestionError(std::string("scene truth: ") + e.what());
  } catch (const ConfigError& e) {
    throw IngestionError(std::string("scene truth: ") + e.what());
  }
  return out;
}

std::vector<TruthObject> truth_from_objects(const std::vector<SceneObject>& objs) {
  std::vector<TruthObject> out;
  for (const auto& o : objs) {
    out.push_back({o.id, o.class_label, o.center, o.ground_truth_radius});
  }
  return out;
}

void write_frame(const fs::path& dir, const Frame& frame) {
  fs::create_directories(dir);
  write_pgm16(dir / "depth.pgm", frame.depth);

  std::string csv;
  csv.reserve(frame.lidar.points.size() * 40);
  for (const auto& p : frame.lidar.points) {
    append_double(csv, p.x());
    csv += ',';
    append_double(csv, p.y());
    csv += ',';
    append_double(csv, p.z());
    csv += '\n';
  }
  write_text(dir / "lidar.csv", csv);

  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(frame.robot_pose.rotation(r, c));
  }
  const json pose = {{"index", frame.index},
                     {"timestamp", frame.timestamp},
                     {"position", vec_json(frame.robot_pose.position)},
                     {"rotation", rot}};
  write_text(dir / "pose.json", pose.dump(2) + "\n");

  json masks = json::array();
  for (size_t i = 0; i < frame.masks.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "mask_%03zu.pgm", i);
    const auto& m = frame.masks[i];
    std::vector<uint8_t> dense = m.mask.to_dense();
    for (auto& px : dense) px = px ? 255 : 0;
    write_pgm8(dir / name, m.mask.width(), m.mask.height(), dense);
    masks.push_back({{"class", m.class_label}, {"confidence", m.confidence}, {"file", name}});
  }
  write_text(dir / "masks.json", masks.dump(2) + "\n");
}

Frame read_frame(const fs::path& dir, const CameraIntrinsics& intr) {
  Frame f;
  f.depth = read_pgm16(dir / "depth.pgm");
  if (f.depth.width() != intr.width || f.depth.height() != intr.height) {
    throw IngestionError(dir.string() + ": depth size does not match calibration");
  }

  std::ifstream in(dir / "lidar.csv", std::ios::binary);
  if (!in) throw IngestionError("cannot open " + (dir / "lidar.csv").string());
  std::string line;
  int lineno = 0;
  f.lidar.frame = FrameId::kLidar;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double xyz[3];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 3; ++k) {
      auto res = std::from_chars(p, end, xyz[k]);
      if (res.ec != std::errc() || (k < 2 && (res.ptr == end || *res.ptr != ','))) {
        throw IngestionError((dir / "lidar.csv").string() + ": bad line " +
                             std::to_string(lineno));
      }
      p = res.ptr + (k < 2 ? 1 : 0);
    }
    f.lidar.points.emplace_back(xyz[0], xyz[1], xyz[2]);
  }

  const json pose = read_json(dir / "pose.json");
  try {
    f.index = pose.at("index").get<int>();
    f.timestamp = pose.at("timestamp").get<double>();
    f.robot_pose.position = vec_from(pose.at("position"));
    const auto& rot = pose.at("rotation");
    if (!rot.is_array() || rot.size() != 9) throw IngestionError("rotation needs 9 values");
    for (int k = 0; k < 9; ++k) f.robot_pose.rotation(k / 3, k % 3) = rot[k].get<double>();
  } catch (const json::exception& e) {
    throw IngestionError((dir / "pose.json").string() + ": " + e.what());
  }
  if (!is_rotation(f.robot_pose.rotation, 1e-6)) {
    throw IngestionError((dir / "pose.json").string() + ": rotation is not orthonormal");
  }

  const json masks = read_json(dir / "masks.json");
  try {
    for (const auto& m : masks) {
      int w = 0, h = 0;
      auto pixels = read_pgm8(dir / m.at("file").get<std::string>(), &w, &h);
      if (w != intr.width || h != intr.height) {
        throw IngestionError(dir.string() + ": mask size does not match calibration");
      }
      for (auto& px : pixels) px = px > 127 ? 1 : 0;
      DetectionMask d;
      d.class_label = m.at("class").get<std::string>();
      d.confidence = m.at("confidence").get<double>();
      d.mask = BinaryMask::from_dense(w, h, pixels);
      f.masks.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw IngestionError((dir / "masks.json").string() + ": " + e.what());
  }
  return f;
}

DatasetWriter::DatasetWriter(fs::path root, const Calibration& calib, const Scene& scene)
    : root_(std::move(root)) {
  fs::create_directories(root_ / "frames");
  save_calibration(root_ / "calib.json", calib);
  write_text(root_ / "scene_truth.json", scene_to_json(scene).dump(2) + "\n");
}

void DatasetWriter::write(const Frame& frame) {
  write_frame(root_ / "frames" / frame_dir_name(frame.index), frame);
  ++count_;
}

size_t write_dataset(const fs::path& root, const Calibration& calib, const Scene& scene,
                     FrameSource& source) {
  DatasetWriter writer(root, calib, scene);
  while (auto f = source.next()) writer.write(*f);
  return writer.frames_written();
}

DatasetReader::DatasetReader(fs::path root) : root_(std::move(root)) {
  if (!fs::is_directory(root_)) {
    throw IngestionError("dataset directory not found: " + root_.string());
  }
  try {
    calib_ = load_calibration(root_ / "calib.json");
  } catch (const IngestionError&) {
    throw;
  } catch (const Error& e) {
    throw IngestionError(e.what());
  }
  if (fs::exists(root_ / "scene_truth.json")) {
    objects_ = scene_objects_from_json(read_json(root_ / "scene_truth.json"));
  }
  if (fs::is_directory(root_ / "frames")) {
    for (const auto& e : fs::directory_iterator(root_ / "frames")) {
      if (e.is_directory()) frames_.push_back(e.path());
    }
  }
  std::sort(frames_.begin(), frames_.end());
}

std::optional<Frame> DatasetReader::next() {
  if (cursor_ >= frames_.size()) return std::nullopt;
  return read_frame(frames_[cursor_++], calib_.camera);
}

}  // namespace artmap
