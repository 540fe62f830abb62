#include <filesystem>
#include <fstream>
#include <functional>

#include <gtest/gtest.h>

#include "artmap/config.h"
#include "artmap/dataset.h"
#include "artmap/digest.h"
#include "artmap/error.h"
#include "artmap/pipeline.h"

using namespace artmap;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "artmap_dataset" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

PipelineConfig small_config() {
  PipelineConfig cfg = office_mini_config();
  cfg.scene.object_count = 4;
  cfg.scene.arena_x = cfg.scene.arena_y = 8.0;
  cfg.scene.keep_out_path = {{-2.5, -2.5}, {2.5, -2.5}, {2.5, 2.5}};
  cfg.trajectory = {{{-2.5, -2.5}, {2.5, -2.5}, {2.5, 2.5}}, 1.0, 1.0};
  return cfg;
}

void make_dataset(const fs::path& root, const PipelineConfig& cfg, uint64_t seed) {
  const Scene scene = generate_scene(cfg.scene, seed);
  TrajectorySource src(scene, cfg.trajectory, cfg.sensors, seed);
  write_dataset(root, cfg.sensors.calibration(), scene, src);
}

void overwrite(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary | std::ios::trunc) << text;
}

}  // namespace

TEST(Dataset, FrameRoundTripIsBitExact) {
  const auto cfg = small_config();
  const Scene scene = generate_scene(cfg.scene, 3);
  TrajectorySource src(scene, cfg.trajectory, cfg.sensors, 3);
  const auto dir = fresh_dir("frame");
  int checked = 0;
  while (auto f = src.next()) {
    write_frame(dir / std::to_string(f->index), *f);
    const Frame back = read_frame(dir / std::to_string(f->index), cfg.sensors.camera.intrinsics);
    EXPECT_EQ(back.index, f->index);
    EXPECT_EQ(back.timestamp, f->timestamp);
    EXPECT_EQ(back.robot_pose.position, f->robot_pose.position);
    EXPECT_EQ(back.robot_pose.rotation, f->robot_pose.rotation);
    EXPECT_EQ(back.depth, f->depth);
    EXPECT_EQ(back.lidar.frame, FrameId::kLidar);
    EXPECT_EQ(back.lidar.points, f->lidar.points);
    EXPECT_EQ(back.masks, f->masks);
    checked += !f->masks.empty();
  }
  EXPECT_GT(checked, 0);
}

TEST(Dataset, DirectoryLayoutAndTruth) {
  const auto cfg = small_config();
  const auto root = fresh_dir("layout");
  make_dataset(root, cfg, 4);
  EXPECT_TRUE(fs::exists(root / "calib.json"));
  EXPECT_TRUE(fs::exists(root / "scene_truth.json"));
  EXPECT_TRUE(fs::exists(root / "frames" / "000001" / "depth.pgm"));
  EXPECT_TRUE(fs::exists(root / "frames" / "000001" / "lidar.csv"));
  EXPECT_TRUE(fs::exists(root / "frames" / "000001" / "pose.json"));
  EXPECT_TRUE(fs::exists(root / "frames" / "000001" / "masks.json"));
  DatasetReader reader(root);
  EXPECT_EQ(reader.calibration(), cfg.sensors.calibration());
  EXPECT_EQ(reader.objects(), generate_scene(cfg.scene, 4).objects);
  EXPECT_EQ(reader.frame_count(), sample_trajectory(cfg.trajectory).size());
  ASSERT_EQ(reader.truth().size(), 4u);
  EXPECT_EQ(reader.truth()[0].radius, reader.objects()[0].ground_truth_radius);
  int expect = 1;
  while (auto f = reader.next()) EXPECT_EQ(f->index, expect++);
  reader.rewind();
  EXPECT_EQ(reader.next()->index, 1);
}

TEST(Dataset, FixedSeedGivesIdenticalBytes) {
  const auto cfg = small_config();
  const auto a = fresh_dir("seed_a"), b = fresh_dir("seed_b"), c = fresh_dir("seed_c");
  make_dataset(a, cfg, 9);
  make_dataset(b, cfg, 9);
  make_dataset(c, cfg, 10);
  EXPECT_EQ(directory_digest(a), directory_digest(b));
  EXPECT_NE(directory_digest(a), directory_digest(c));
}

TEST(Dataset, ReplayMatchesLiveSource) {
  const auto cfg = small_config();
  const auto root = fresh_dir("replay");
  make_dataset(root, cfg, 5);
  const Scene scene = generate_scene(cfg.scene, 5);
  TrajectorySource live(scene, cfg.trajectory, cfg.sensors, 5);
  DatasetReader replay(root);
  const auto calib = cfg.sensors.calibration();
  EXPECT_EQ(run_mapping(live, calib, cfg).map, run_mapping(replay, calib, cfg).map);
}

TEST(Dataset, EmptyDatasetGivesEmptyMap) {
  const auto cfg = small_config();
  const auto root = fresh_dir("empty");
  DatasetWriter writer(root, cfg.sensors.calibration(), Scene{});
  DatasetReader reader(root);
  EXPECT_EQ(reader.frame_count(), 0u);
  const auto result = run_mapping(reader, reader.calibration(), cfg);
  EXPECT_EQ(result.frames, 0u);
  EXPECT_TRUE(result.map.artifacts.empty());
}

TEST(Dataset, MissingDirectory) {
  EXPECT_THROW(DatasetReader(fresh_dir("nothing")), IngestionError);
}

TEST(Dataset, CorruptFilesAreIngestionErrors) {
  const auto cfg = small_config();
  const auto base = fresh_dir("corrupt_base");
  make_dataset(base, cfg, 6);
  const auto intr = cfg.sensors.camera.intrinsics;

  struct Case {
    const char* name;
    std::function<void(const fs::path&)> damage;
  };
  const std::vector<Case> cases = {
      {"no_depth", [](const fs::path& d) { fs::remove(d / "depth.pgm"); }},
      {"depth_8bit", [](const fs::path& d) { overwrite(d / "depth.pgm", "P5\n640 480\n255\n"); }},
      {"depth_truncated",
       [](const fs::path& d) { fs::resize_file(d / "depth.pgm", fs::file_size(d / "depth.pgm") / 2); }},
      {"depth_not_pgm", [](const fs::path& d) { overwrite(d / "depth.pgm", "hello"); }},
      {"depth_wrong_size", [](const fs::path& d) {
         write_pgm16(d / "depth.pgm", DepthImage(10, 10));
       }},
      {"lidar_garbage", [](const fs::path& d) { overwrite(d / "lidar.csv", "1,2,x\n"); }},
      {"lidar_short", [](const fs::path& d) { overwrite(d / "lidar.csv", "1,2\n"); }},
      {"no_lidar", [](const fs::path& d) { fs::remove(d / "lidar.csv"); }},
      {"pose_json", [](const fs::path& d) { overwrite(d / "pose.json", "{"); }},
      {"pose_field", [](const fs::path& d) { overwrite(d / "pose.json", "{\"index\": 1}"); }},
      {"pose_rotation", [](const fs::path& d) {
         overwrite(d / "pose.json",
                   "{\"index\":1,\"timestamp\":0,\"position\":[0,0,0],"
                   "\"rotation\":[2,0,0,0,1,0,0,0,1]}");
       }},
      {"masks_json", [](const fs::path& d) { overwrite(d / "masks.json", "[{\"class\": 1}]"); }},
      {"mask_file", [](const fs::path& d) {
         overwrite(d / "masks.json", "[{\"class\":\"a\",\"confidence\":1,\"file\":\"gone.pgm\"}]");
       }},
  };
  for (const auto& c : cases) {
    const auto dir = fresh_dir(std::string("corrupt_") + c.name);
    fs::copy(base / "frames" / "000001", dir, fs::copy_options::recursive);
    c.damage(dir);
    EXPECT_THROW(read_frame(dir, intr), IngestionError) << c.name;
  }

  const auto no_calib = fresh_dir("no_calib");
  fs::copy(base, no_calib, fs::copy_options::recursive);
  overwrite(no_calib / "calib.json", "{\"camera\": 3}");
  EXPECT_THROW(DatasetReader{no_calib}, IngestionError);
  fs::remove(no_calib / "calib.json");
  EXPECT_THROW(DatasetReader{no_calib}, IngestionError);
}

TEST(Digest, Fnv1a) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(Digest, DirectoryDigestSeesNamesAndContents) {
  const auto dir = fresh_dir("digest");
  fs::create_directories(dir / "sub");
  overwrite(dir / "sub" / "x", "1");
  const auto first = directory_digest(dir);
  overwrite(dir / "sub" / "x", "2");
  EXPECT_NE(directory_digest(dir), first);
  overwrite(dir / "sub" / "x", "1");
  EXPECT_EQ(directory_digest(dir), first);
  fs::rename(dir / "sub" / "x", dir / "sub" / "y");
  EXPECT_NE(directory_digest(dir), first);
}
