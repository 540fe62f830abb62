#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "artmap/calibration.h"
#include "artmap/evaluation.h"
#include "artmap/simulator.h"

namespace artmap {

// On-disk layout:
//   calib.json, scene_truth.json,
//   frames/NNNNNN/{depth.pgm, lidar.csv, pose.json, masks.json, mask_XXX.pgm}

nlohmann::json scene_to_json(const Scene& scene);
std::vector<SceneObject> scene_objects_from_json(const nlohmann::json& j);
std::vector<TruthObject> truth_from_objects(const std::vector<SceneObject>& objs);

void write_frame(const std::filesystem::path& frame_dir, const Frame& frame);
// Throws IngestionError on missing or malformed files.
Frame read_frame(const std::filesystem::path& frame_dir,
                 const CameraIntrinsics& intr);

class DatasetWriter {
 public:
  DatasetWriter(std::filesystem::path root, const Calibration& calib,
                const Scene& scene);
  void write(const Frame& frame);
  size_t frames_written() const { return count_; }

 private:
  std::filesystem::path root_;
  size_t count_ = 0;
};

// Drains `source` into a dataset directory. Returns the number of frames.
size_t write_dataset(const std::filesystem::path& root, const Calibration& calib,
                     const Scene& scene, FrameSource& source);

// Streams frames back from a dataset directory in index order.
class DatasetReader : public FrameSource {
 public:
  explicit DatasetReader(std::filesystem::path root);
  std::optional<Frame> next() override;

  const Calibration& calibration() const { return calib_; }
  const std::vector<SceneObject>& objects() const { return objects_; }
  std::vector<TruthObject> truth() const { return truth_from_objects(objects_); }
  size_t frame_count() const { return frames_.size(); }
  void rewind() { cursor_ = 0; }

 private:
  std::filesystem::path root_;
  Calibration calib_;
  std::vector<SceneObject> objects_;
  std::vector<std::filesystem::path> frames_;
  size_t cursor_ = 0;
};

}  // namespace artmap
