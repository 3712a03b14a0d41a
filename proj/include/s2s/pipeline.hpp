#pragma once

#include "s2s/bundle.hpp"
#include "s2s/category_map.hpp"
#include "s2s/layout_opt.hpp"
#include "s2s/matching.hpp"
#include "s2s/metrics.hpp"
#include "s2s/pose_align.hpp"
#include "s2s/scene.hpp"
#include "s2s/scene_graph.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace s2s {

struct PipelineConfig {
  std::uint64_t seed = 0;   // feeds the optimizer
  std::size_t threads = 0;  // 0: hardware concurrency
  bool use_scorer = true;   // point scorer, when the bundle ships weights
  AlignOptions align;
  OptimizerConfig optimizer;  // seed is replaced by the pipeline seed
  bool optimize = true;
  GraphThresholds graph;
  double collision_iou = kCollisionIouThreshold;
  std::size_t metric_point_budget = kMetricPointBudget;

  // {"v": 1, "seed", "threads",
  //  "matching": {"use_scorer"},
  //  "align": {"cost": "chamfer" | "box_extent", "point_budget", "refine"},
  //  "optimizer": {"enabled", "max_steps", "step", "mode": "greedy" | "metropolis",
  //                "temperature", "cooling", "exclude_related_pairs"},
  //  "thresholds": {"support_gap_min", "support_gap_max", "support_overlap_min",
  //                 "containment_inside_min", "containment_inflate", "embedding_inside_min",
  //                 "embedding_inside_max", "collision_iou", "metric_point_budget"}}
  // Absent keys keep their defaults; unknown sections are rejected.
  static PipelineConfig from_json(const std::string& text);
  std::string to_json() const;
};

struct ObjectOutcome {
  std::string object_id;
  std::vector<std::string> ranking;  // asset ids, best first
  std::optional<AlignmentResult> alignment;
  std::string asset_id;  // top-1, empty on failure
  std::string failure;   // empty on success
};

struct PipelineResult {
  SceneLayout initial;  // aligned placements before optimization
  SceneLayout layout;   // final
  SceneGraph graph;
  OptimizeResult optimization;
  std::vector<ObjectOutcome> outcomes;  // bundle object order
  MetricsReport report;
};

// Rank, take top-1 and align every object (in parallel), then build the scene
// graph and optimize the layout. Objects that fail keep their scan box as a
// placeholder and are listed in report.failures. Deterministic for a config.
PipelineResult run_pipeline(const SceneBundle& bundle, const PipelineConfig& cfg = {});

// Scenes processed in parallel; results in input order.
std::vector<PipelineResult> run_pipelines(std::span<const SceneBundle> bundles, const PipelineConfig& cfg = {});

// The bundle with placements, boxes, rankings, statuses and graph filled in.
SceneBundle apply_result(const SceneBundle& bundle, const PipelineResult& result);

inline constexpr std::size_t kAugmentMaxK = 5;

// Swaps every placed asset for a uniformly drawn member of ranks 2..k+1 of its
// ranking (annotated ranking preferred) and re-aligns it onto the scan.
// Throws kInvalidArgument for k outside [1, 5], kPrecondition when a placed
// object has fewer than two ranked assets.
SceneBundle augment_scene(const SceneBundle& placed, std::size_t k, std::uint64_t seed,
                          const AlignOptions& align = {});

inline constexpr std::size_t kMicroSceneMaxObjects = 24;

// One micro-scene per large-category object with at least one support child;
// children beyond 23 are dropped smallest volume first. Small objects are
// listed by id with merged categories.
std::vector<MicroScene> extract_microscenes(const SceneLayout& layout, const SceneGraph& graph,
                                            const CategoryMap& map);

std::string microscenes_json(const std::vector<MicroScene>& scenes);

struct EvalOptions {
  std::size_t metric_point_budget = kMetricPointBudget;
  double collision_iou = kCollisionIouThreshold;
  GraphThresholds graph;
};

// Per-object and per-scene metrics of a placed bundle against a ground-truth
// bundle with the same scene id and object ids (kConflict otherwise). The
// predicted graph is taken from the bundle when present.
MetricsReport evaluate_scene(const SceneBundle& predicted, const SceneBundle& truth, const CategoryMap& map,
                             const EvalOptions& opts = {});

struct EvalReport {
  std::vector<std::pair<std::string, MetricsReport>> scenes;  // sorted by scene id
  MetricsReport aggregate;  // objects keyed "<scene>/<object>"

  // {"v": 1, "aggregate": report, "scenes": {id: report}}
  std::string to_json() const;
  // Aggregate rows, then per-scene rows with the scene id prefixed to the object id.
  std::string to_csv() const;
};

// Pairs bundles by scene id (kConflict for unmatched ids or duplicates).
// Top-k and collision rates pool objects; scale error averages scenes; CKL
// compares the merged small-object categories of the two micro-scene populations.
EvalReport eval_command(std::span<const SceneBundle> predicted, std::span<const SceneBundle> truth,
                        const CategoryMap& map, const EvalOptions& opts = {});

// glTF 2.0 node list: a root node turning z-up into y-up, then one child per
// object with translation, yaw quaternion, uniform scale and the asset cloud
// ref in extras. Placeholders carry their box instead.
std::string export_gltf(const SceneBundle& placed);

// Writes scene.json plus copied files, metrics.json, metrics.csv, scene.gltf
// and moves.csv into out_dir.
void write_pipeline_outputs(const SceneBundle& bundle, const PipelineResult& result,
                            const std::filesystem::path& out_dir);

}  // namespace s2s
