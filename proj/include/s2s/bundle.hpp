#pragma once

// Scene bundle on disk:
//   scene.json         manifest (below)
//   clouds/*.ply       scan segments and candidate asset clouds
//   images/*.png       optional object crops
//   embeddings/*.bin   embedding rows plus their .json sidecars
//   annotations.json   optional human records
//
// scene.json:
//   {"v": 1, "scene_id": "..", "floor": [[x, y], ..], "floor_z": 0,
//    "embeddings": ["embeddings/scene.bin"], "scorer": "scorer.json",
//    "objects": [{"id": "..", "category": "..", "scan": "clouds/o.ply",
//                 "image": "images/o.png", "caption": "..", "truth": "asset id",
//                 "candidates": [{"asset_id": "..", "cloud": "clouds/a.ply", "provenance": ".."}]}]}
// "floor" defaults to the convex hull of the scan boxes, "floor_z" to 0.
// Pipeline outputs add per object "placement", "box", "ranking", "status" and
// a top-level "graph"; such manifests re-ingest as ordinary bundles.

#include "s2s/annotation.hpp"
#include "s2s/geometry.hpp"
#include "s2s/matching.hpp"
#include "s2s/scene.hpp"
#include "s2s/scene_graph.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace s2s {

inline constexpr const char* kManifestName = "scene.json";
inline constexpr const char* kAnnotationsName = "annotations.json";
inline constexpr const char* kDataRootEnv = "S2S_DATA_ROOT";

struct Placement {
  std::string asset_id;
  PoseTransform transform;  // asset -> scan frame
};

struct BundleObject {
  std::string id;
  std::string category;
  std::string scan_ref;
  PointCloud scan;
  std::optional<std::string> image_ref;
  std::optional<std::string> caption;
  CandidateSet candidates;  // embeddings unit-normalized at ingestion

  // Pipeline outputs, present in exported manifests.
  std::optional<Placement> placement;
  std::optional<Aabb> box;
  std::vector<std::string> ranking;
  std::string status;  // empty, "ok" or "failed: <reason>"

  Aabb scan_box() const { return Aabb::of(scan); }
  const Candidate* candidate(const std::string& asset_id) const;
  std::optional<std::string> truth_asset() const;
};

struct SceneBundle {
  std::filesystem::path root;
  std::string scene_id;
  FloorPolygon floor;
  bool floor_given = false;
  double floor_z = 0.0;
  std::vector<BundleObject> objects;
  std::map<std::string, PointCloud> asset_clouds;  // keyed by bundle-relative path
  std::vector<std::string> embedding_refs;
  std::optional<std::string> scorer_ref;
  std::optional<PointScorerWeights> scorer;
  AnnotationStore annotations;
  std::optional<SceneGraph> graph;

  int find(const std::string& object_id) const;
  const PointCloud& asset_cloud(const std::string& ref) const;

  // Scan boxes, ignoring any placements.
  SceneLayout scan_layout() const;
  // Stored boxes where present (placed assets or moved placeholders), else the
  // placed asset's box, else the scan box.
  SceneLayout placed_layout() const;
};

// Resolves a relative bundle path against $S2S_DATA_ROOT when it is set.
std::filesystem::path resolve_bundle_path(const std::filesystem::path& path);

// Loads and validates a bundle directory. Error codes: kMissingFile (manifest,
// cloud, image, embedding or scorer absent), kDuplicateId (object ids, or asset
// ids within one candidate list), kDimensionMismatch (embedding tables or scorer
// of differing dimension), kMalformed (bad JSON, PLY or embedding rows, unsafe
// paths), kValidation (fewer than two candidates, unknown truth asset).
SceneBundle ingest(const std::filesystem::path& path);

// Manifest text for the bundle, keys sorted.
std::string manifest_json(const SceneBundle& bundle);

// Writes scene.json, annotations.json when non-empty, and copies every
// referenced file from bundle.root into out_dir.
void write_bundle(const SceneBundle& bundle, const std::filesystem::path& out_dir);

// Sorted subdirectories of root that hold a scene.json.
std::vector<std::filesystem::path> list_bundles(const std::filesystem::path& root);

// Matching input for one annotated object:
//   {"v": 1, "scene_id", "object_id", "image", "text", "image_query", "text_query",
//    "candidates": [{"asset_id", "cloud", "provenance", "embedding"}], "truth_index",
//    "transform", "ranking"}
std::string quadruple_json(const SceneBundle& bundle, const BundleObject& object,
                           const AnnotationRecord& record);
// Rebuilds the candidate set; throws kMalformed or kValidation.
CandidateSet candidate_set_from_quadruple(const std::string& text);

}  // namespace s2s
