#include "artmap/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

namespace artmap {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kCorrect:
      return "correct";
    case Category::kWrongLocalization:
      return "wrong_localization";
    case Category::kDuplication:
      return "duplication";
    case Category::kWrongClassification:
      return "wrong_classification";
  }
  return "wrong_localization";
}

namespace {

double error_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                     const EvaluationConfig& cfg) {
  return cfg.xy_only ? (a.head<2>() - b.head<2>()).norm() : (a - b).norm();
}

}  // namespace

std::vector<DetectionOutcome> categorize(const ArtifactMap& map,
                                         const std::vector<TruthObject>& truth,
                                         const EvaluationConfig& cfg) {
  // Artifacts sorted by id so the result does not depend on input order.
  std::vector<const MapArtifact*> arts;
  for (const auto& a : map.artifacts) arts.push_back(&a);
  std::sort(arts.begin(), arts.end(),
            [](const MapArtifact* a, const MapArtifact* b) { return a->id < b->id; });

  struct Pair {
    double d;
    int art_id;
    size_t ai;
    size_t ti;
  };
  std::vector<Pair> pairs;
  for (size_t i = 0; i < arts.size(); ++i) {
    for (size_t j = 0; j < truth.size(); ++j) {
      if (arts[i]->class_label != truth[j].class_label) continue;
      const double d = error_between(arts[i]->position, truth[j].center, cfg);
      if (d < truth[j].radius) pairs.push_back({d, arts[i]->id, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    return std::tie(a.d, a.art_id, truth[a.ti].id) <
           std::tie(b.d, b.art_id, truth[b.ti].id);
  });

  std::vector<DetectionOutcome> out(arts.size());
  std::vector<bool> art_done(arts.size(), false);
  std::vector<bool> truth_taken(truth.size(), false);
  for (const auto& p : pairs) {
    if (art_done[p.ai] || truth_taken[p.ti]) continue;
    art_done[p.ai] = true;
    truth_taken[p.ti] = true;
    out[p.ai] = {Category::kCorrect, arts[p.ai]->id, truth[p.ti].id, p.d};
  }

  for (size_t i = 0; i < arts.size(); ++i) {
    if (art_done[i]) continue;
    const MapArtifact& a = *arts[i];
    // Nearest same-class truth within radius, then nearest other-class.
    std::optional<size_t> same, other;
    double d_same = std::numeric_limits<double>::infinity();
    double d_other = d_same, d_any = d_same;
    std::optional<size_t> nearest;
    for (size_t j = 0; j < truth.size(); ++j) {
      const double d = error_between(a.position, truth[j].center, cfg);
      if (d < d_any) {
        d_any = d;
        nearest = j;
      }
      if (d >= truth[j].radius) continue;
      if (truth[j].class_label == a.class_label) {
        if (d < d_same) {
          d_same = d;
          same = j;
        }
      } else if (d < d_other) {
        d_other = d;
        other = j;
      }
    }
    DetectionOutcome o;
    o.artifact_id = a.id;
    if (same) {
      o.category = Category::kDuplication;
      o.truth_id = truth[*same].id;
      o.distance_error = d_same;
    } else if (other) {
      o.category = Category::kWrongClassification;
      o.truth_id = truth[*other].id;
      o.distance_error = d_other;
    } else {
      o.category = Category::kWrongLocalization;
      o.distance_error = nearest ? d_any : 0.0;
    }
    out[i] = o;
  }
  return out;
}

double Report::object_rate() const {
  return total_objects == 0 ? 0.0 : static_cast<double>(objects_found) / total_objects;
}

double Report::detection_rate() const {
  return total_detections == 0 ? 0.0 : static_cast<double>(correct) / total_detections;
}

Report& Report::operator+=(const Report& o) {
  correct += o.correct;
  wrong_localization += o.wrong_localization;
  duplication += o.duplication;
  wrong_classification += o.wrong_classification;
  total_detections += o.total_detections;
  total_objects += o.total_objects;
  objects_found += o.objects_found;
  return *this;
}

Report report(const std::vector<DetectionOutcome>& outcomes,
              const std::vector<TruthObject>& truth) {
  Report r;
  r.total_objects = static_cast<int>(truth.size());
  r.total_detections = static_cast<int>(outcomes.size());
  std::set<int> found;
  for (const auto& o : outcomes) {
    switch (o.category) {
      case Category::kCorrect:
        ++r.correct;
        if (o.truth_id) found.insert(*o.truth_id);
        break;
      case Category::kWrongLocalization:
        ++r.wrong_localization;
        break;
      case Category::kDuplication:
        ++r.duplication;
        break;
      case Category::kWrongClassification:
        ++r.wrong_classification;
        break;
    }
  }
  r.objects_found = static_cast<int>(found.size());
  return r;
}

nlohmann::json report_to_json(const Report& r) {
  return {{"correct", r.correct},
          {"wrong_localization", r.wrong_localization},
          {"duplication", r.duplication},
          {"wrong_classification", r.wrong_classification},
          {"total_detections", r.total_detections},
          {"total_objects", r.total_objects},
          {"objects_found", r.objects_found},
          {"object_rate", r.object_rate()},
          {"detection_rate", r.detection_rate()}};
}

std::string report_table(const std::vector<std::pair<std::string, Report>>& columns) {
  const std::vector<std::string> rows = {
      "Correct detection",  "Wrong localization", "Duplication",
      "Wrong classification", "Total detections", "Total objects",
      "Correct objects [%]", "Correct detections [%]"};
  auto cell = [](const Report& r, size_t row) -> std::string {
    char buf[32];
    switch (row) {
      case 0: return std::to_string(r.correct);
      case 1: return std::to_string(r.wrong_localization);
      case 2: return std::to_string(r.duplication);
      case 3: return std::to_string(r.wrong_classification);
      case 4: return std::to_string(r.total_detections);
      case 5: return std::to_string(r.total_objects);
      case 6:
        std::snprintf(buf, sizeof buf, "%.1f", 100.0 * r.object_rate());
        return buf;
      default:
        std::snprintf(buf, sizeof buf, "%.1f", 100.0 * r.detection_rate());
        return buf;
    }
  };
  size_t label_w = 0;
  for (const auto& r : rows) label_w = std::max(label_w, r.size());
  std::vector<size_t> col_w;
  for (const auto& [name, rep] : columns) {
    size_t w = name.size();
    for (size_t i = 0; i < rows.size(); ++i) w = std::max(w, cell(rep, i).size());
    col_w.push_back(w);
  }
  std::ostringstream os;
  auto pad_left = [&](const std::string& s, size_t w) {
    os << std::string(w - s.size(), ' ') << s;
  };
  os << std::string(label_w, ' ');
  for (size_t c = 0; c < columns.size(); ++c) {
    os << "  ";
    pad_left(columns[c].first, col_w[c]);
  }
  os << '\n';
  for (size_t i = 0; i < rows.size(); ++i) {
    os << rows[i] << std::string(label_w - rows[i].size(), ' ');
    for (size_t c = 0; c < columns.size(); ++c) {
      os << "  ";
      pad_left(cell(columns[c].second, i), col_w[c]);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace artmap
