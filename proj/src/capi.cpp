#include "s2s/s2s.h"

#include "json_io.hpp"
#include "s2s/bundle.hpp"
#include "s2s/category_map.hpp"
#include "s2s/error.hpp"
#include "s2s/pipeline.hpp"
#include "s2s/review_service.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

struct s2s_bundle {
  s2s::SceneBundle bundle;
};
struct s2s_config {
  s2s::PipelineConfig config;
};
struct s2s_result {
  s2s::PipelineResult result;
  s2s::GraphThresholds thresholds;
};
struct s2s_server {
  std::unique_ptr<s2s::ReviewServer> server;
};

namespace {

using s2s::json_io::json;

thread_local std::string g_last_error;

template <class F>
s2s_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return S2S_OK;
  } catch (const s2s::Error& e) {
    g_last_error = e.what();
    return static_cast<s2s_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return S2S_E_UNKNOWN;
}

template <class T>
void need(T* p, const char* what) {
  if (!p) s2s::fail(s2s::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

void give(const std::string& s, char** out) {
  if (!out) return;
  char* buf = static_cast<char*>(std::malloc(s.size() + 1));
  if (!buf) throw std::bad_alloc();
  std::memcpy(buf, s.c_str(), s.size() + 1);
  *out = buf;
}

const s2s::PipelineConfig& config_or_default(const s2s_config* cfg) {
  static const s2s::PipelineConfig kDefault;
  return cfg ? cfg->config : kDefault;
}

s2s::CategoryMap category_map(const char* path) {
  return path ? s2s::CategoryMap::load(path) : s2s::CategoryMap::builtin();
}

bool is_placed(const s2s::SceneBundle& b) {
  for (const auto& o : b.objects) {
    if (o.placement || o.box) return true;
  }
  return false;
}

s2s::SceneLayout working_layout(const s2s::SceneBundle& b) {
  return is_placed(b) ? b.placed_layout() : b.scan_layout();
}

std::string failure_text(const std::exception& e) {
  if (const auto* err = dynamic_cast<const s2s::Error*>(&e)) {
    return std::string(s2s::error_code_name(err->code())) + ": " + err->what();
  }
  return std::string("E_UNKNOWN: ") + e.what();
}

}  // namespace

extern "C" {

const char* s2s_version(void) { return "0.1.0"; }

const char* s2s_status_name(s2s_status status) { return s2s::error_code_name(static_cast<s2s::ErrorCode>(status)); }

const char* s2s_last_error(void) { return g_last_error.c_str(); }

void s2s_string_free(char* s) { std::free(s); }

s2s_status s2s_config_default(s2s_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new s2s_config{};
  });
}

s2s_status s2s_config_from_json(const char* text, s2s_config** out) {
  return guard([&] {
    need(text, "json");
    need(out, "out");
    *out = new s2s_config{s2s::PipelineConfig::from_json(text)};
  });
}

s2s_status s2s_config_load(const char* path, s2s_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new s2s_config{s2s::PipelineConfig::from_json(s2s::json_io::read_bytes(path))};
  });
}

s2s_status s2s_config_set_seed(s2s_config* cfg, uint64_t seed) {
  return guard([&] {
    need(cfg, "config");
    cfg->config.seed = seed;
  });
}

s2s_status s2s_config_set_threads(s2s_config* cfg, uint32_t threads) {
  return guard([&] {
    need(cfg, "config");
    cfg->config.threads = threads;
  });
}

s2s_status s2s_config_to_json(const s2s_config* cfg, char** out) {
  return guard([&] {
    need(cfg, "config");
    give(cfg->config.to_json(), out);
  });
}

void s2s_config_free(s2s_config* cfg) { delete cfg; }

s2s_status s2s_bundle_open(const char* path, s2s_bundle** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new s2s_bundle{s2s::ingest(path)};
  });
}

void s2s_bundle_free(s2s_bundle* bundle) { delete bundle; }

s2s_status s2s_bundle_scene_id(const s2s_bundle* bundle, char** out) {
  return guard([&] {
    need(bundle, "bundle");
    give(bundle->bundle.scene_id, out);
  });
}

s2s_status s2s_bundle_summary_json(const s2s_bundle* bundle, char** out) {
  return guard([&] {
    need(bundle, "bundle");
    const auto& b = bundle->bundle;
    std::size_t candidates = 0, placed = 0, dim = 0;
    for (const auto& o : b.objects) {
      candidates += o.candidates.candidates.size();
      placed += o.placement.has_value();
      if (!o.candidates.candidates.empty()) dim = o.candidates.candidates.front().embedding.dim();
    }
    give(s2s::json_io::dump(json{{"v", 1},
                                 {"scene_id", b.scene_id},
                                 {"objects", b.objects.size()},
                                 {"candidates", candidates},
                                 {"annotated", b.annotations.latest.size()},
                                 {"placed", placed},
                                 {"dim", dim}}),
         out);
  });
}

s2s_status s2s_bundle_manifest_json(const s2s_bundle* bundle, char** out) {
  return guard([&] {
    need(bundle, "bundle");
    give(s2s::manifest_json(bundle->bundle), out);
  });
}

s2s_status s2s_bundle_write(const s2s_bundle* bundle, const char* out_dir) {
  return guard([&] {
    need(bundle, "bundle");
    need(out_dir, "out_dir");
    s2s::write_bundle(bundle->bundle, out_dir);
  });
}

s2s_status s2s_match_json(const s2s_bundle* bundle, const s2s_config* cfg, char** out) {
  return guard([&] {
    need(bundle, "bundle");
    const auto& b = bundle->bundle;
    const auto& c = config_or_default(cfg);
    const s2s::PointScorerWeights* scorer = c.use_scorer && b.scorer ? &*b.scorer : nullptr;
    json objects = json::array();
    for (const auto& o : b.objects) {
      json entry{{"object_id", o.id}};
      try {
        const auto r = s2s::rank_candidates(o.candidates, scorer);
        json scores = json::array();
        for (const auto i : r.order) scores.push_back(r.scores.fused[static_cast<Eigen::Index>(i)]);
        entry["ranking"] = r.asset_ids;
        entry["scores"] = std::move(scores);
      } catch (const std::exception& e) {
        entry["failure"] = failure_text(e);
      }
      objects.push_back(std::move(entry));
    }
    give(s2s::json_io::dump(json{{"v", 1}, {"scene_id", b.scene_id}, {"objects", std::move(objects)}}), out);
  });
}

s2s_status s2s_align_json(const s2s_bundle* bundle, const s2s_config* cfg, char** out) {
  return guard([&] {
    need(bundle, "bundle");
    auto c = config_or_default(cfg);
    c.optimize = false;
    const auto r = s2s::run_pipeline(bundle->bundle, c);
    json objects = json::array();
    for (const auto& o : r.outcomes) {
      json entry{{"object_id", o.object_id}, {"asset_id", o.asset_id}};
      if (o.alignment) {
        entry["transform"] = s2s::json_io::pose(o.alignment->transform);
        entry["yaw_degrees"] = o.alignment->yaw_degrees();
        entry["yaw_costs"] = o.alignment->yaw_costs;
        entry["alignment_cost"] = o.alignment->alignment_cost;
      }
      if (!o.failure.empty()) entry["failure"] = o.failure;
      objects.push_back(std::move(entry));
    }
    give(s2s::json_io::dump(json{{"v", 1}, {"scene_id", bundle->bundle.scene_id}, {"objects", std::move(objects)}}),
         out);
  });
}

s2s_status s2s_scenegraph_json(const s2s_bundle* bundle, const s2s_config* cfg, char** out) {
  return guard([&] {
    need(bundle, "bundle");
    const auto& b = bundle->bundle;
    const auto graph = s2s::build_scene_graph(working_layout(b), config_or_default(cfg).graph);
    give(s2s::json_io::dump(json{{"v", 1}, {"scene_id", b.scene_id}, {"graph", s2s::json_io::graph(graph)}}), out);
  });
}

s2s_status s2s_pipeline_run(const s2s_bundle* bundle, const s2s_config* cfg, s2s_result** out) {
  return guard([&] {
    need(bundle, "bundle");
    need(out, "out");
    const auto& c = config_or_default(cfg);
    *out = new s2s_result{s2s::run_pipeline(bundle->bundle, c), c.graph};
  });
}

void s2s_result_free(s2s_result* result) { delete result; }

s2s_status s2s_result_optimization_json(const s2s_result* result, char** out) {
  return guard([&] {
    need(result, "result");
    const auto& r = result->result;
    const auto& opt = r.optimization;
    std::size_t accepted = 0;
    for (const auto& m : opt.moves) accepted += m.accepted;
    json violations = json::array();
    for (const auto& v : s2s::validate_graph(r.graph, r.layout, result->thresholds)) {
      violations.push_back(json{{"kind", s2s::relation_kind_name(v.relation.kind)},
                                {"parent", v.relation.parent},
                                {"child", v.relation.child},
                                {"reason", v.reason}});
    }
    json boxes = json::object();
    for (const auto& o : r.layout.objects) boxes[o.id] = s2s::json_io::box(o.box);
    give(s2s::json_io::dump(json{{"v", 1},
                                 {"scene_id", r.layout.scene_id},
                                 {"initial_loss", opt.trace.front()},
                                 {"final_loss", opt.final_loss()},
                                 {"steps", opt.steps},
                                 {"accepted_moves", accepted},
                                 {"trace", opt.trace},
                                 {"violations", std::move(violations)},
                                 {"boxes", std::move(boxes)}}),
         out);
  });
}

s2s_status s2s_result_moves_csv(const s2s_result* result, char** out) {
  return guard([&] {
    need(result, "result");
    give(result->result.optimization.moves_csv(), out);
  });
}

s2s_status s2s_result_metrics_json(const s2s_result* result, char** out) {
  return guard([&] {
    need(result, "result");
    give(result->result.report.to_json(), out);
  });
}

s2s_status s2s_result_metrics_csv(const s2s_result* result, char** out) {
  return guard([&] {
    need(result, "result");
    give(result->result.report.to_csv(), out);
  });
}

s2s_status s2s_result_outcomes_json(const s2s_result* result, char** out) {
  return guard([&] {
    need(result, "result");
    json objects = json::array();
    for (const auto& o : result->result.outcomes) {
      json entry{{"object_id", o.object_id}, {"asset_id", o.asset_id}, {"ranking", o.ranking}};
      if (!o.failure.empty()) entry["failure"] = o.failure;
      objects.push_back(std::move(entry));
    }
    give(s2s::json_io::dump(json{{"v", 1}, {"objects", std::move(objects)}}), out);
  });
}

s2s_status s2s_result_apply(const s2s_bundle* bundle, const s2s_result* result, s2s_bundle** out) {
  return guard([&] {
    need(bundle, "bundle");
    need(result, "result");
    need(out, "out");
    *out = new s2s_bundle{s2s::apply_result(bundle->bundle, result->result)};
  });
}

s2s_status s2s_result_write(const s2s_bundle* bundle, const s2s_result* result, const char* out_dir) {
  return guard([&] {
    need(bundle, "bundle");
    need(result, "result");
    need(out_dir, "out_dir");
    s2s::write_pipeline_outputs(bundle->bundle, result->result, out_dir);
  });
}

s2s_status s2s_augment(const s2s_bundle* placed, uint32_t k, uint64_t seed, const s2s_config* cfg,
                       s2s_bundle** out) {
  return guard([&] {
    need(placed, "bundle");
    need(out, "out");
    *out = new s2s_bundle{s2s::augment_scene(placed->bundle, k, seed, config_or_default(cfg).align)};
  });
}

s2s_status s2s_microscenes_json(const s2s_bundle* bundle, const s2s_config* cfg, const char* category_map_path,
                                char** out) {
  return guard([&] {
    need(bundle, "bundle");
    const auto layout = working_layout(bundle->bundle);
    const auto graph = s2s::build_scene_graph(layout, config_or_default(cfg).graph);
    give(s2s::microscenes_json(s2s::extract_microscenes(layout, graph, category_map(category_map_path))), out);
  });
}

s2s_status s2s_export_gltf(const s2s_bundle* placed, char** out) {
  return guard([&] {
    need(placed, "bundle");
    give(s2s::export_gltf(placed->bundle), out);
  });
}

s2s_status s2s_eval(const s2s_bundle* const* predicted, size_t n_predicted, const s2s_bundle* const* truth,
                    size_t n_truth, const s2s_config* cfg, const char* category_map_path, char** json_out,
                    char** csv_out) {
  return guard([&] {
    if (n_predicted) need(predicted, "predicted");
    if (n_truth) need(truth, "truth");
    std::vector<s2s::SceneBundle> pred, gt;
    for (size_t i = 0; i < n_predicted; ++i) {
      need(predicted[i], "predicted bundle");
      pred.push_back(predicted[i]->bundle);
    }
    for (size_t i = 0; i < n_truth; ++i) {
      need(truth[i], "truth bundle");
      gt.push_back(truth[i]->bundle);
    }
    const auto& c = config_or_default(cfg);
    s2s::EvalOptions opts;
    opts.metric_point_budget = c.metric_point_budget;
    opts.collision_iou = c.collision_iou;
    opts.graph = c.graph;
    const auto report = s2s::eval_command(pred, gt, category_map(category_map_path), opts);
    give(report.to_json(), json_out);
    give(report.to_csv(), csv_out);
  });
}

s2s_status s2s_server_start(const char* root, const char* host, int port, s2s_server** out, int* bound_port) {
  return guard([&] {
    need(root, "root");
    need(out, "out");
    if (port < 0 || port > 65535) s2s::fail(s2s::ErrorCode::kInvalidArgument, "port outside [0, 65535]");
    auto server = std::make_unique<s2s_server>();
    server->server = std::make_unique<s2s::ReviewServer>(root);
    const int bound = server->server->start(host ? host : "127.0.0.1", port);
    if (bound_port) *bound_port = bound;
    *out = server.release();
  });
}

s2s_status s2s_server_wait(s2s_server* server) {
  return guard([&] {
    need(server, "server");
    server->server->wait();
  });
}

s2s_status s2s_server_stop(s2s_server* server) {
  return guard([&] {
    need(server, "server");
    server->server->stop();
  });
}

void s2s_server_free(s2s_server* server) { delete server; }

s2s_status s2s_export_training(const char* root, char** out) {
  return guard([&] {
    need(root, "root");
    give(s2s::ReviewService(root).export_training(), out);
  });
}

}  // extern "C"
