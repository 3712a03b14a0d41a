#include "s2s/annotation.hpp"

#include "json_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace s2s {

bool AnnotationRecord::operator==(const AnnotationRecord& o) const {
  return record_id == o.record_id && object_id == o.object_id && best_asset_id == o.best_asset_id &&
         transform.translation == o.transform.translation && transform.scale == o.transform.scale &&
         transform.yaw == o.transform.yaw && ranking == o.ranking && annotator_id == o.annotator_id &&
         timestamp == o.timestamp;
}

std::map<std::string, std::string> validate_annotation(const AnnotationRecord& r,
                                                       const std::vector<std::string>& candidate_ids) {
  std::map<std::string, std::string> errors;
  const std::set<std::string> known(candidate_ids.begin(), candidate_ids.end());
  if (r.best_asset_id.empty()) {
    errors["best_asset_id"] = "required";
  } else if (!known.count(r.best_asset_id)) {
    errors["best_asset_id"] = "'" + r.best_asset_id + "' is not a candidate of this object";
  }

  if (r.ranking.size() < kRankingMin || r.ranking.size() > kRankingMax) {
    errors["ranking"] = "length " + std::to_string(r.ranking.size()) + " outside [2, 5]";
  } else {
    std::set<std::string> seen;
    for (const auto& id : r.ranking) {
      if (id == r.best_asset_id) {
        errors["ranking"] = "best asset '" + id + "' repeated in ranking";
        break;
      }
      if (!seen.insert(id).second) {
        errors["ranking"] = "duplicate id '" + id + "'";
        break;
      }
      if (!known.count(id)) {
        errors["ranking"] = "'" + id + "' is not a candidate of this object";
        break;
      }
    }
  }

  const auto& t = r.transform;
  if (!t.translation.allFinite()) {
    errors["transform.translation"] = "must be finite";
  }
  if (!std::isfinite(t.scale) || t.scale <= 0.0) errors["transform.scale"] = "must be finite and > 0";
  if (!std::isfinite(t.yaw)) errors["transform.yaw"] = "must be finite";
  if (r.annotator_id.empty()) errors["annotator_id"] = "required";
  if (r.timestamp.empty()) errors["timestamp"] = "required";
  return errors;
}

const AnnotationRecord& AnnotationStore::submit(const std::string& scene_id, AnnotationRecord record) {
  const auto n = std::count_if(history.begin(), history.end(),
                               [&](const AnnotationRecord& h) { return h.object_id == record.object_id; });
  record.record_id = scene_id + ":" + record.object_id + "#" + std::to_string(n + 1);
  history.push_back(record);
  return latest[record.object_id] = std::move(record);
}

std::string AnnotationStore::to_json() const {
  json_io::json j;
  j["v"] = 1;
  j["records"] = json_io::json::object();
  for (const auto& [id, r] : latest) j["records"][id] = json_io::record(r);
  j["history"] = json_io::json::array();
  for (const auto& r : history) j["history"].push_back(json_io::record(r));
  return json_io::dump(j);
}

AnnotationStore AnnotationStore::from_json(const std::string& text) {
  const auto j = json_io::parse(text, "annotations");
  AnnotationStore s;
  try {
    if (j.contains("records")) {
      for (const auto& [id, r] : j.at("records").items()) {
        auto rec = json_io::record(r);
        if (rec.object_id != id) fail(ErrorCode::kMalformed, "annotations: record key '" + id + "' mismatch");
        s.latest[id] = std::move(rec);
      }
    }
    if (j.contains("history")) {
      for (const auto& r : j.at("history")) s.history.push_back(json_io::record(r));
    }
  } catch (const json_io::json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("annotations: ") + e.what());
  }
  return s;
}

std::string pose_to_json(const PoseTransform& t) { return json_io::pose(t).dump(); }

PoseTransform pose_from_json(const std::string& text) {
  try {
    return json_io::pose(json_io::parse(text, "pose"));
  } catch (const json_io::json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("pose: ") + e.what());
  }
}

}  // namespace s2s
