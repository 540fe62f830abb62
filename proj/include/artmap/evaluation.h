#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "artmap/manager.h"

namespace artmap {

struct TruthObject {
  int id = 0;
  std::string class_label;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

enum class Category { kCorrect, kWrongLocalization, kDuplication, kWrongClassification };
std::string_view to_string(Category c);

struct DetectionOutcome {
  Category category = Category::kWrongLocalization;
  int artifact_id = 0;
  std::optional<int> truth_id;
  double distance_error = 0.0;  // to the matched or nearest truth object
};

struct EvaluationConfig {
  bool xy_only = false;
};

// Greedy nearest-first assignment over (artifact, truth) pairs that share a
// class and lie inside the truth radius. Leftover artifacts inside a
// same-class radius are duplicates, inside another class's radius wrong
// classifications, and the rest wrong localizations.
std::vector<DetectionOutcome> categorize(const ArtifactMap& map,
                                         const std::vector<TruthObject>& truth,
                                         const EvaluationConfig& cfg = {});

struct Report {
  int correct = 0;
  int wrong_localization = 0;
  int duplication = 0;
  int wrong_classification = 0;
  int total_detections = 0;
  int total_objects = 0;
  int objects_found = 0;

  double object_rate() const;     // objects found / total objects
  double detection_rate() const;  // correct / total detections

  Report& operator+=(const Report& other);
};

Report report(const std::vector<DetectionOutcome>& outcomes,
              const std::vector<TruthObject>& truth);

nlohmann::json report_to_json(const Report& r);

// Aligned plain-text table, one column per named report.
std::string report_table(const std::vector<std::pair<std::string, Report>>& columns);

}  // namespace artmap
