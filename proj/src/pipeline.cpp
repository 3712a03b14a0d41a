#include "s2s/pipeline.hpp"

#include "json_io.hpp"
#include "parallel.hpp"
#include "s2s/error.hpp"
#include "s2s/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace s2s {
namespace fs = std::filesystem;
using json_io::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) fail(ErrorCode::kMalformed, "config: " + section + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(ErrorCode::kMalformed, "config: unknown key '" + k + "' in " + section);
  }
}

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return std::string(error_code_name(err->code())) + ": " + e.what();
  return std::string("E_UNKNOWN: ") + e.what();
}

PointCloud placed_cloud(const SceneBundle& b, const BundleObject& o) {
  const Candidate* c = o.candidate(o.placement->asset_id);
  if (!c) fail(ErrorCode::kNotFound, o.id + ": placed asset is not a candidate");
  return apply_transform(b.asset_cloud(c->cloud_ref), o.placement->transform);
}

SceneGraph graph_for(const SceneBundle& b, const SceneLayout& layout, const GraphThresholds& th) {
  return b.graph ? *b.graph : build_scene_graph(layout, th);
}

struct MicroStats {
  std::size_t small_out = 0;
  std::size_t small_total = 0;
  CategoryHistogram categories;
};

MicroStats micro_stats(const SceneLayout& layout, const SceneGraph& graph, const CategoryMap& map) {
  MicroStats s;
  for (const auto& ms : extract_microscenes(layout, graph, map)) {
    const auto n = ms.small_objects.size();
    s.small_out += static_cast<std::size_t>(std::llround(out_of_plane_rate(ms) * static_cast<double>(n)));
    s.small_total += n;
    for (const auto& item : ms.small_objects) s.categories[item.category] += 1.0;
  }
  return s;
}

// Objects without a ranking (matching failed) count as misses.
double pooled_topk(const std::vector<std::vector<std::string>>& rankings, const std::vector<std::string>& truths,
                   std::size_t k) {
  std::vector<std::vector<std::string>> ranked;
  std::vector<std::string> ranked_truths;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    if (rankings[i].empty()) continue;
    ranked.push_back(rankings[i]);
    ranked_truths.push_back(truths[i]);
  }
  if (ranked.empty()) return 0.0;
  return topk_accuracy(ranked, ranked_truths, k) * static_cast<double>(ranked.size()) /
         static_cast<double>(rankings.size());
}

// KL over the union of both category sets; absent categories count zero.
double union_category_kl(CategoryHistogram generated, CategoryHistogram reference) {
  for (const auto& [c, v] : generated) reference.emplace(c, 0.0);
  for (const auto& [c, v] : reference) generated.emplace(c, 0.0);
  return category_kl(generated, reference);
}

// Everything one scene contributes to a pooled report.
struct SceneParts {
  MetricsReport report;
  std::vector<std::vector<std::string>> rankings;
  std::vector<std::string> truths;
  std::size_t colliding = 0;
  std::size_t objects = 0;
  MicroStats generated;
  MicroStats reference;
};

SceneParts evaluate_parts(const SceneBundle& pred, const SceneBundle& truth, const CategoryMap& map,
                          const EvalOptions& opts) {
  if (pred.scene_id != truth.scene_id)
    fail(ErrorCode::kConflict, "scene id mismatch: '" + pred.scene_id + "' vs '" + truth.scene_id + "'");
  if (pred.objects.size() != truth.objects.size())
    fail(ErrorCode::kConflict, pred.scene_id + ": object counts differ");

  SceneParts parts;
  auto& report = parts.report;
  const SceneLayout pred_layout = pred.placed_layout();
  std::vector<Aabb> pred_boxes, truth_boxes;
  for (const auto& t : truth.objects) {
    const int pi = pred.find(t.id);
    if (pi < 0) fail(ErrorCode::kConflict, pred.scene_id + ": object id mismatch, '" + t.id + "' not predicted");
    const auto& p = pred.objects[static_cast<std::size_t>(pi)];
    pred_boxes.push_back(pred_layout.objects[static_cast<std::size_t>(pi)].box);
    truth_boxes.push_back(t.scan_box());

    if (const auto truth_asset = t.truth_asset()) {
      parts.rankings.push_back(p.ranking);
      parts.truths.push_back(*truth_asset);
    }

    if (!p.placement) {
      const std::string why = p.status.rfind("failed: ", 0) == 0 ? p.status.substr(8) : "no placement";
      report.failures.push_back(t.id + ": " + why);
      continue;
    }
    try {
      const PointCloud placed = placed_cloud(pred, p);
      const Aabb placed_box = Aabb::of(placed);
      ObjectMetrics m;
      m.cd = normalized_chamfer_distance(placed, t.scan, opts.metric_point_budget);
      m.ecd = normalized_enhanced_chamfer_distance(placed, t.scan, opts.metric_point_budget);
      m.iou = bbox_iou(placed_box, t.scan_box());
      if (placed.has_colors() && t.scan.has_colors()) m.color_hist_kl = color_histogram_kl(placed, t.scan);
      m.size_err_m3 = size_error(placed_box, t.scan_box());
      report.per_object[t.id] = m;
    } catch (const std::exception& e) {
      report.failures.push_back(t.id + ": " + describe(e));
    }
  }
  std::sort(report.failures.begin(), report.failures.end());

  auto& s = report.per_scene;
  parts.objects = pred_boxes.size();
  if (!pred_boxes.empty()) {
    s.scale_err_m = scale_error(pred_boxes, truth_boxes);
    const auto rates = collision_rates(pred_boxes, opts.collision_iou);
    s.col_obj = rates.col_obj;
    s.col_scene = rates.col_scene;
    parts.colliding = static_cast<std::size_t>(std::llround(rates.col_obj * static_cast<double>(parts.objects)));
  }
  if (!parts.truths.empty()) {
    s.top1 = pooled_topk(parts.rankings, parts.truths, 1);
    s.top5 = pooled_topk(parts.rankings, parts.truths, 5);
  }

  parts.generated = micro_stats(pred_layout, graph_for(pred, pred_layout, opts.graph), map);
  const SceneLayout truth_layout = truth.scan_layout();
  parts.reference = micro_stats(truth_layout, build_scene_graph(truth_layout, opts.graph), map);
  if (parts.generated.small_total > 0) {
    s.r_out = static_cast<double>(parts.generated.small_out) / static_cast<double>(parts.generated.small_total);
  }
  if (!parts.generated.categories.empty() && !parts.reference.categories.empty()) {
    s.ckl = union_category_kl(parts.generated.categories, parts.reference.categories);
  }
  return parts;
}

json microscene_item(const MicroScene::Item& item) {
  return json{{"id", item.id}, {"category", item.category}, {"box", json_io::box(item.box)}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  const json j = json_io::parse(text, "config");
  check_keys(j, {"v", "seed", "threads", "matching", "align", "optimizer", "thresholds"}, "config");
  PipelineConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("matching")) {
      const auto& m = j.at("matching");
      check_keys(m, {"use_scorer"}, "matching");
      c.use_scorer = m.value("use_scorer", c.use_scorer);
    }
    if (j.contains("align")) {
      const auto& a = j.at("align");
      check_keys(a, {"cost", "point_budget", "refine"}, "align");
      const std::string cost = a.value("cost", std::string("chamfer"));
      if (cost == "chamfer") c.align.cost = AlignCost::kChamfer;
      else if (cost == "box_extent") c.align.cost = AlignCost::kBoxExtent;
      else fail(ErrorCode::kMalformed, "config: unknown align cost '" + cost + "'");
      c.align.point_budget = a.value("point_budget", c.align.point_budget);
      c.align.refine = a.value("refine", c.align.refine);
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      check_keys(o, {"enabled", "max_steps", "step", "mode", "temperature", "cooling", "exclude_related_pairs"},
                 "optimizer");
      c.optimize = o.value("enabled", c.optimize);
      c.optimizer.max_steps = o.value("max_steps", c.optimizer.max_steps);
      if (o.contains("step")) c.optimizer.moves = OptimizerConfig::default_moves(o.at("step").get<double>());
      const std::string mode = o.value("mode", std::string("greedy"));
      if (mode == "greedy") c.optimizer.mode = AcceptanceMode::kGreedy;
      else if (mode == "metropolis") c.optimizer.mode = AcceptanceMode::kMetropolis;
      else fail(ErrorCode::kMalformed, "config: unknown optimizer mode '" + mode + "'");
      c.optimizer.temperature = o.value("temperature", c.optimizer.temperature);
      c.optimizer.cooling = o.value("cooling", c.optimizer.cooling);
      c.optimizer.exclude_related_pairs = o.value("exclude_related_pairs", c.optimizer.exclude_related_pairs);
    }
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      check_keys(t,
                 {"support_gap_min", "support_gap_max", "support_overlap_min", "containment_inside_min",
                  "containment_inflate", "embedding_inside_min", "embedding_inside_max", "collision_iou",
                  "metric_point_budget"},
                 "thresholds");
      auto& g = c.graph;
      g.support_gap_min = t.value("support_gap_min", g.support_gap_min);
      g.support_gap_max = t.value("support_gap_max", g.support_gap_max);
      g.support_overlap_min = t.value("support_overlap_min", g.support_overlap_min);
      g.containment_inside_min = t.value("containment_inside_min", g.containment_inside_min);
      g.containment_inflate = t.value("containment_inflate", g.containment_inflate);
      g.embedding_inside_min = t.value("embedding_inside_min", g.embedding_inside_min);
      g.embedding_inside_max = t.value("embedding_inside_max", g.embedding_inside_max);
      c.collision_iou = t.value("collision_iou", c.collision_iou);
      c.metric_point_budget = t.value("metric_point_budget", c.metric_point_budget);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("config: ") + e.what());
  }
  c.optimizer.validate();
  if (c.align.point_budget == 0 || c.metric_point_budget == 0)
    fail(ErrorCode::kInvalidArgument, "config: point budgets must be positive");
  return c;
}

std::string PipelineConfig::to_json() const {
  json j;
  j["v"] = 1;
  j["seed"] = seed;
  j["threads"] = threads;
  j["matching"] = json{{"use_scorer", use_scorer}};
  j["align"] = json{{"cost", align.cost == AlignCost::kChamfer ? "chamfer" : "box_extent"},
                    {"point_budget", align.point_budget},
                    {"refine", align.refine}};
  j["optimizer"] = json{{"enabled", optimize},
                        {"max_steps", optimizer.max_steps},
                        {"step", optimizer.moves.empty() ? 0.0 : optimizer.moves.front().norm()},
                        {"mode", optimizer.mode == AcceptanceMode::kGreedy ? "greedy" : "metropolis"},
                        {"temperature", optimizer.temperature},
                        {"cooling", optimizer.cooling},
                        {"exclude_related_pairs", optimizer.exclude_related_pairs}};
  j["thresholds"] = json{{"support_gap_min", graph.support_gap_min},
                         {"support_gap_max", graph.support_gap_max},
                         {"support_overlap_min", graph.support_overlap_min},
                         {"containment_inside_min", graph.containment_inside_min},
                         {"containment_inflate", graph.containment_inflate},
                         {"embedding_inside_min", graph.embedding_inside_min},
                         {"embedding_inside_max", graph.embedding_inside_max},
                         {"collision_iou", collision_iou},
                         {"metric_point_budget", metric_point_budget}};
  return json_io::dump(j);
}

PipelineResult run_pipeline(const SceneBundle& b, const PipelineConfig& cfg) {
  PipelineResult r;
  const std::size_t n = b.objects.size();
  r.outcomes.resize(n);
  const PointScorerWeights* scorer = cfg.use_scorer && b.scorer ? &*b.scorer : nullptr;
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const auto& o = b.objects[i];
    auto& out = r.outcomes[i];
    out.object_id = o.id;
    try {
      const Ranking ranking = rank_candidates(o.candidates, scorer);
      out.ranking = ranking.asset_ids;
      const auto& top = o.candidates.candidates[ranking.order.front()];
      out.alignment = align_pose(b.asset_cloud(top.cloud_ref), o.scan, cfg.align);
      out.asset_id = top.asset_id;
    } catch (const std::exception& e) {
      out.alignment.reset();
      out.asset_id.clear();
      out.failure = describe(e);
    }
  });

  r.initial = b.scan_layout();
  std::vector<Aabb> extent_boxes = r.initial.boxes();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& out = r.outcomes[i];
    if (!out.failure.empty()) continue;
    auto& so = r.initial.objects[i];
    so.asset_id = out.asset_id;
    so.pose = out.alignment->transform;
    const auto* c = b.objects[i].candidate(out.asset_id);
    so.box = Aabb::of(apply_transform(b.asset_cloud(c->cloud_ref), *so.pose));
    extent_boxes.push_back(so.box);
  }
  // Without a surveyed floor, the room spans the scans and the placed assets.
  if (!b.floor_given && n > 0) r.initial.floor = estimate_floor_plan(extent_boxes);

  r.graph = build_scene_graph(r.initial, cfg.graph);
  if (cfg.optimize && n > 0) {
    OptimizerConfig oc = cfg.optimizer;
    oc.seed = cfg.seed;
    r.optimization = optimize_layout(r.initial, r.graph, oc);
  } else {
    r.optimization.layout = r.initial;
    r.optimization.trace = {collision_loss(r.initial.boxes())};
  }
  r.layout = r.optimization.layout;

  const EvalOptions eo{cfg.metric_point_budget, cfg.collision_iou, cfg.graph};
  r.report = evaluate_scene(apply_result(b, r), b, CategoryMap::builtin(), eo);
  return r;
}

std::vector<PipelineResult> run_pipelines(std::span<const SceneBundle> bundles, const PipelineConfig& cfg) {
  std::vector<PipelineResult> out(bundles.size());
  PipelineConfig inner = cfg;
  if (bundles.size() > 1) inner.threads = 1;  // scenes already run in parallel
  parallel_for(bundles.size(), cfg.threads, [&](std::size_t i) { out[i] = run_pipeline(bundles[i], inner); });
  return out;
}

SceneBundle apply_result(const SceneBundle& bundle, const PipelineResult& r) {
  if (r.outcomes.size() != bundle.objects.size() || r.layout.objects.size() != bundle.objects.size())
    fail(ErrorCode::kConflict, "pipeline result does not belong to this bundle");
  SceneBundle out = bundle;
  for (std::size_t i = 0; i < out.objects.size(); ++i) {
    auto& o = out.objects[i];
    const auto& oc = r.outcomes[i];
    const auto& so = r.layout.objects[i];
    if (oc.object_id != o.id || so.id != o.id) fail(ErrorCode::kConflict, "pipeline result object order differs");
    o.ranking = oc.ranking;
    o.box = so.box;
    if (oc.failure.empty()) {
      o.placement = Placement{oc.asset_id, *so.pose};
      o.status = "ok";
    } else {
      o.placement.reset();
      o.status = "failed: " + oc.failure;
    }
  }
  out.graph = r.graph;
  return out;
}

SceneBundle augment_scene(const SceneBundle& placed, std::size_t k, std::uint64_t seed, const AlignOptions& align) {
  if (k < 1 || k > kAugmentMaxK) fail(ErrorCode::kInvalidArgument, "augment: k must be in [1, 5]");
  SceneBundle out = placed;
  Rng rng(seed);
  for (auto& o : out.objects) {
    if (!o.placement) continue;
    std::vector<std::string> ranking;
    if (const auto it = placed.annotations.latest.find(o.id); it != placed.annotations.latest.end()) {
      ranking.push_back(it->second.best_asset_id);
      ranking.insert(ranking.end(), it->second.ranking.begin(), it->second.ranking.end());
    } else {
      ranking = o.ranking;
    }
    if (ranking.size() < 2) fail(ErrorCode::kPrecondition, "augment: '" + o.id + "' has no ranking of 2 or more assets");
    if (std::set<std::string>(ranking.begin(), ranking.end()).size() != ranking.size())
      fail(ErrorCode::kPrecondition, "augment: '" + o.id + "' ranking repeats an asset");
    const std::size_t count = std::min(k, ranking.size() - 1);
    const std::string& pick = ranking[1 + rng.below(count)];
    const Candidate* c = o.candidate(pick);
    if (!c) fail(ErrorCode::kNotFound, "augment: '" + pick + "' is not a candidate of '" + o.id + "'");
    const PointCloud& cloud = placed.asset_cloud(c->cloud_ref);
    const auto aligned = align_pose(cloud, o.scan, align);
    o.placement = Placement{pick, aligned.transform};
    o.box = Aabb::of(apply_transform(cloud, aligned.transform));
    o.status = "ok";
  }
  out.graph = build_scene_graph(out.placed_layout());
  return out;
}

std::vector<MicroScene> extract_microscenes(const SceneLayout& layout, const SceneGraph& graph,
                                            const CategoryMap& map) {
  std::vector<MicroScene> out;
  constexpr std::size_t kMaxChildren = kMicroSceneMaxObjects - 1;
  for (const auto& large : layout.objects) {
    const std::string merged = map.merge(large.category);
    if (!map.is_large(merged)) continue;
    std::vector<MicroScene::Item> children;
    for (const Relation* rel : graph.children_of(large.id)) {
      if (rel->kind != RelationKind::kSupport) continue;
      const int ci = layout.find(rel->child);
      if (ci < 0) continue;
      const auto& child = layout.objects[static_cast<std::size_t>(ci)];
      children.push_back({child.id, map.merge(child.category), child.box});
    }
    if (children.empty()) continue;
    if (children.size() > kMaxChildren) {
      std::sort(children.begin(), children.end(), [](const auto& a, const auto& b) {
        const double va = a.box.volume(), vb = b.box.volume();
        return va != vb ? va > vb : a.id < b.id;
      });
      children.resize(kMaxChildren);
    }
    std::sort(children.begin(), children.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    MicroScene ms;
    ms.large = {large.id, merged, large.box};
    ms.top_surface = top_surface(large.box);
    ms.small_objects = std::move(children);
    out.push_back(std::move(ms));
  }
  return out;
}

std::string microscenes_json(const std::vector<MicroScene>& scenes) {
  json j;
  j["v"] = 1;
  j["microscenes"] = json::array();
  for (const auto& ms : scenes) {
    json m;
    m["large"] = microscene_item(ms.large);
    m["top_surface"] = json_io::polygon(ms.top_surface);
    m["small_objects"] = json::array();
    for (const auto& item : ms.small_objects) m["small_objects"].push_back(microscene_item(item));
    m["r_out"] = out_of_plane_rate(ms);
    j["microscenes"].push_back(std::move(m));
  }
  return json_io::dump(j);
}

MetricsReport evaluate_scene(const SceneBundle& predicted, const SceneBundle& truth, const CategoryMap& map,
                             const EvalOptions& opts) {
  return evaluate_parts(predicted, truth, map, opts).report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["v"] = 1;
  j["aggregate"] = nlohmann::ordered_json::parse(aggregate.to_json());
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const auto& [id, r] : scenes) s[id] = nlohmann::ordered_json::parse(r.to_json());
  j["scenes"] = std::move(s);
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
  std::string out = aggregate.to_csv();
  for (const auto& [id, r] : scenes) {
    const std::string csv = r.to_csv();
    const auto pos = csv.rfind("\nscene,,");
    out += "scene," + id + "," + csv.substr(pos + 8);
  }
  return out;
}

EvalReport eval_command(std::span<const SceneBundle> predicted, std::span<const SceneBundle> truth,
                        const CategoryMap& map, const EvalOptions& opts) {
  std::map<std::string, const SceneBundle*> by_id;
  for (const auto& t : truth) {
    if (!by_id.emplace(t.scene_id, &t).second) fail(ErrorCode::kConflict, "duplicate truth scene '" + t.scene_id + "'");
  }
  std::set<std::string> seen;
  for (const auto& p : predicted) {
    if (!by_id.count(p.scene_id)) fail(ErrorCode::kConflict, "no truth scene for '" + p.scene_id + "'");
    if (!seen.insert(p.scene_id).second) fail(ErrorCode::kConflict, "duplicate predicted scene '" + p.scene_id + "'");
  }
  if (seen.size() != by_id.size()) fail(ErrorCode::kConflict, "truth scenes without predictions");

  std::vector<const SceneBundle*> preds;
  for (const auto& p : predicted) preds.push_back(&p);
  std::sort(preds.begin(), preds.end(), [](const auto* a, const auto* b) { return a->scene_id < b->scene_id; });
  std::vector<SceneParts> parts(preds.size());
  parallel_for(preds.size(), 0, [&](std::size_t i) {
    parts[i] = evaluate_parts(*preds[i], *by_id.at(preds[i]->scene_id), map, opts);
  });

  EvalReport out;
  auto& agg = out.aggregate;
  std::vector<std::vector<std::string>> rankings;
  std::vector<std::string> truths;
  std::size_t colliding = 0, objects = 0, scenes_colliding = 0, small_out = 0, small_total = 0;
  double scale_sum = 0.0;
  std::size_t scale_n = 0;
  CategoryHistogram generated, reference;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& sp = parts[i];
    const std::string& sid = preds[i]->scene_id;
    out.scenes.emplace_back(sid, sp.report);
    for (const auto& [oid, m] : sp.report.per_object) agg.per_object[sid + "/" + oid] = m;
    for (const auto& f : sp.report.failures) agg.failures.push_back(sid + "/" + f);
    rankings.insert(rankings.end(), sp.rankings.begin(), sp.rankings.end());
    truths.insert(truths.end(), sp.truths.begin(), sp.truths.end());
    colliding += sp.colliding;
    objects += sp.objects;
    if (sp.report.per_scene.col_scene > 0.0) ++scenes_colliding;
    if (sp.report.per_scene.scale_err_m) {
      scale_sum += *sp.report.per_scene.scale_err_m;
      ++scale_n;
    }
    small_out += sp.generated.small_out;
    small_total += sp.generated.small_total;
    for (const auto& [c, v] : sp.generated.categories) generated[c] += v;
    for (const auto& [c, v] : sp.reference.categories) reference[c] += v;
  }
  auto& s = agg.per_scene;
  if (scale_n > 0) s.scale_err_m = scale_sum / static_cast<double>(scale_n);
  if (!truths.empty()) {
    s.top1 = pooled_topk(rankings, truths, 1);
    s.top5 = pooled_topk(rankings, truths, 5);
  }
  if (objects > 0) s.col_obj = static_cast<double>(colliding) / static_cast<double>(objects);
  if (!parts.empty()) s.col_scene = static_cast<double>(scenes_colliding) / static_cast<double>(parts.size());
  if (small_total > 0) s.r_out = static_cast<double>(small_out) / static_cast<double>(small_total);
  if (!generated.empty() && !reference.empty()) s.ckl = union_category_kl(generated, reference);
  return out;
}

std::string export_gltf(const SceneBundle& placed) {
  const SceneLayout layout = placed.placed_layout();
  json nodes = json::array();
  json root;
  root["name"] = placed.scene_id;
  // -90 degrees about x: z-up scene frame into glTF's y-up frame.
  root["rotation"] = json::array({-std::numbers::sqrt2 / 2.0, 0.0, 0.0, std::numbers::sqrt2 / 2.0});
  root["children"] = json::array();
  nodes.push_back(root);
  for (std::size_t i = 0; i < placed.objects.size(); ++i) {
    const auto& o = placed.objects[i];
    const auto& so = layout.objects[i];
    json node;
    node["name"] = o.id;
    json extras;
    extras["category"] = o.category;
    if (o.placement && so.pose) {
      const auto& t = *so.pose;
      node["translation"] = json_io::vec3(t.translation);
      node["rotation"] = json::array({0.0, 0.0, std::sin(t.yaw / 2.0), std::cos(t.yaw / 2.0)});
      node["scale"] = json::array({t.scale, t.scale, t.scale});
      extras["asset_id"] = o.placement->asset_id;
      extras["asset_ref"] = o.candidate(o.placement->asset_id)->cloud_ref;
      extras["yaw_degrees"] = t.yaw * 180.0 / std::numbers::pi;
    } else {
      node["translation"] = json_io::vec3(so.box.center());
      extras["placeholder"] = true;
      extras["box"] = json_io::box(so.box);
    }
    node["extras"] = std::move(extras);
    nodes[0]["children"].push_back(nodes.size());
    nodes.push_back(std::move(node));
  }
  json j;
  j["asset"] = json{{"version", "2.0"}, {"generator", "s2s"}};
  j["scene"] = 0;
  j["scenes"] = json::array({json{{"nodes", json::array({0})}}});
  j["nodes"] = std::move(nodes);
  return json_io::dump(j);
}

void write_pipeline_outputs(const SceneBundle& bundle, const PipelineResult& result, const fs::path& out_dir) {
  const SceneBundle applied = apply_result(bundle, result);
  write_bundle(applied, out_dir);
  json_io::write_atomic(out_dir / "metrics.json", result.report.to_json());
  json_io::write_atomic(out_dir / "metrics.csv", result.report.to_csv());
  json_io::write_atomic(out_dir / "scene.gltf", export_gltf(applied));
  json_io::write_atomic(out_dir / "moves.csv", result.optimization.moves_csv());
}

}  // namespace s2s
