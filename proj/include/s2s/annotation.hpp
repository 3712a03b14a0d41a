#pragma once

#include "s2s/geometry.hpp"

#include <map>
#include <string>
#include <vector>

namespace s2s {

inline constexpr std::size_t kRankingMin = 2;
inline constexpr std::size_t kRankingMax = 5;

// One human verdict: the best candidate, its corrected pose, and 2-5 runner-up
// assets in order.
struct AnnotationRecord {
  std::string record_id;  // assigned on submit: "<scene>:<object>#<n>"
  std::string object_id;
  std::string best_asset_id;
  PoseTransform transform;
  std::vector<std::string> ranking;
  std::string annotator_id;
  std::string timestamp;

  bool operator==(const AnnotationRecord& o) const;
};

// Field name -> reason; empty when the record is acceptable for an object with
// these candidate asset ids.
std::map<std::string, std::string> validate_annotation(const AnnotationRecord& record,
                                                       const std::vector<std::string>& candidate_ids);

// Latest record per object plus every submission in arrival order.
struct AnnotationStore {
  std::map<std::string, AnnotationRecord> latest;
  std::vector<AnnotationRecord> history;

  // Last write wins; the previous record stays in history.
  const AnnotationRecord& submit(const std::string& scene_id, AnnotationRecord record);
  bool empty() const { return history.empty(); }

  // {"v": 1, "records": {object_id: record}, "history": [record, ..]}
  std::string to_json() const;
  static AnnotationStore from_json(const std::string& text);
};

// {"translation": [x, y, z], "scale": s, "yaw": radians, "yaw_degrees": deg}.
// Parsing accepts either yaw field; "yaw" wins when both are present.
std::string pose_to_json(const PoseTransform& t);
PoseTransform pose_from_json(const std::string& text);

}  // namespace s2s
