// Command-line front end. Talks to the core only through the C interface.

#include "s2s/s2s.h"

#include <CLI11.hpp>

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Failure {
  s2s_status status;
  std::string message;
};

void check(s2s_status s, const std::string& context) {
  if (s != S2S_OK) throw Failure{s, context + ": " + s2s_last_error()};
}

struct Text {
  char* p = nullptr;
  ~Text() { s2s_string_free(p); }
  char** out() { return &p; }
  std::string str() const { return p ? p : ""; }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
  ~Handle() { Free(p); }
};
using Bundle = Handle<s2s_bundle, s2s_bundle_free>;
using Config = Handle<s2s_config, s2s_config_free>;
using Result = Handle<s2s_result, s2s_result_free>;

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  std::uint32_t threads = 0;
  std::string category_map;
  std::string out;
};

Config load_config(const Globals& g) {
  Config c;
  if (g.config_path.empty()) {
    check(s2s_config_default(&c.p), "config");
  } else {
    check(s2s_config_load(g.config_path.c_str(), &c.p), g.config_path);
  }
  check(s2s_config_set_seed(c.p, g.seed), "config");
  check(s2s_config_set_threads(c.p, g.threads), "config");
  return c;
}

Bundle open_bundle(const std::string& path) {
  Bundle b;
  check(s2s_bundle_open(path.c_str(), &b.p), path);
  return b;
}

const char* category_map_or_null(const Globals& g) { return g.category_map.empty() ? nullptr : g.category_map.c_str(); }

// Relative roots follow the same $S2S_DATA_ROOT rule as bundle paths.
fs::path resolve_root(const std::string& path) {
  const fs::path p(path);
  const char* env = std::getenv("S2S_DATA_ROOT");
  if (p.is_relative() && env && *env && !fs::exists(p)) return fs::path(env) / p;
  return p;
}

std::vector<fs::path> bundle_dirs(const std::string& path) {
  const fs::path root = resolve_root(path);
  if (fs::is_regular_file(root / "scene.json")) return {root};
  if (!fs::is_directory(root)) throw Failure{S2S_E_MISSING_FILE, "not a directory: " + root.string()};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::is_regular_file(e.path() / "scene.json")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Failure{S2S_E_IO, "cannot write " + path.string()};
}

// Writes to --out when given, else stdout.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
  } else {
    write_file(g.out, text);
  }
}

void require_out(const Globals& g, const char* command) {
  if (g.out.empty()) throw Failure{S2S_E_INVALID_ARGUMENT, std::string(command) + " needs --out DIR"};
}

void ignore_signal(int) {}

void run_serve(const std::string& root, const std::string& host, int port) {
  // Background jobs inherit SIGINT as ignored, and sigwait on an ignored
  // signal is unspecified; a no-op handler makes delivery well defined.
  signal(SIGINT, ignore_signal);
  signal(SIGTERM, ignore_signal);
  // Block the shutdown signals in every thread; a dedicated thread waits for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  s2s_server* server = nullptr;
  int bound = 0;
  check(s2s_server_start(resolve_root(root).c_str(), host.c_str(), port, &server, &bound), "serve");
  std::cerr << "review service on http://" << host << ":" << bound << "\n";
  std::thread stopper([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    s2s_server_stop(server);
  });
  s2s_server_wait(server);
  // The stopper may still be blocked when the server ends on its own.
  pthread_kill(stopper.native_handle(), SIGTERM);
  stopper.join();
  s2s_server_free(server);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scan-to-simulation pipeline: match, align, scene graph, optimize, export, evaluate, review."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(s2s_version()));
  Globals g;
  app.add_option("--config", g.config_path, "JSON config with matching, align, optimizer and thresholds sections")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "seed for every random draw");
  app.add_option("--threads", g.threads, "worker threads (0: all cores)");
  app.add_option("--category-map", g.category_map, "category map JSON (default: built-in)")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output file or directory (default: stdout)");

  std::string bundle;
  auto bundle_command = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("bundle", bundle, "scene bundle directory")->required();
    return sub;
  };

  auto* ingest = bundle_command("ingest", "validate a bundle; with --out, write a normalized copy");
  auto* match = bundle_command("match", "rank every object's candidates");
  auto* align = bundle_command("align", "rank, then align each top-1 asset to its scan");
  auto* scenegraph = bundle_command("scenegraph", "support, containment and embedding relations");
  auto* optimize = bundle_command("optimize", "full pipeline; report the collision optimization");
  std::string moves_csv;
  optimize->add_option("--moves", moves_csv, "also write the move log as CSV");
  auto* exporter = app.add_subcommand("export", "full pipeline; write the placed bundle, glTF and metrics to --out");
  exporter->fallthrough();
  exporter->add_option("bundle", bundle, "scene bundle directory (a bundle root with --training)")->required();
  bool training = false;
  exporter->add_flag("--training", training, "export annotated quadruples of every bundle below the root");
  auto* augment = bundle_command("augment", "swap placed assets for ranked alternatives; write to --out");
  std::uint32_t k = 5;
  augment->add_option("-k,--k", k, "draw among ranks 2..k+1")->check(CLI::Range(1, 5));
  auto* micro = bundle_command("microscene", "large furniture with the small objects it supports");
  auto* eval = app.add_subcommand("eval", "compare predicted and ground-truth bundles");
  eval->fallthrough();
  std::string pred_path, truth_path;
  eval->add_option("--pred", pred_path, "predicted bundle or root of bundles")->required();
  eval->add_option("--truth", truth_path, "ground-truth bundle or root of bundles")->required();
  auto* serve = app.add_subcommand("serve", "annotation review service over a bundle root");
  serve->fallthrough();
  std::string root;
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("root", root, "directory holding scene bundles")->required();
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (0 picks a free one)")->check(CLI::Range(0, 65535));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      run_serve(root, host, port);
      return 0;
    }
    if (*exporter && training) {
      Text t;
      check(s2s_export_training(resolve_root(bundle).c_str(), t.out()), "export");
      emit(g, t.str());
      return 0;
    }
    Config cfg = load_config(g);
    if (*eval) {
      std::vector<Bundle> pred, truth;
      for (const auto& d : bundle_dirs(pred_path)) pred.push_back(open_bundle(d.string()));
      for (const auto& d : bundle_dirs(truth_path)) truth.push_back(open_bundle(d.string()));
      std::vector<const s2s_bundle*> pp, tp;
      for (const auto& b : pred) pp.push_back(b.p);
      for (const auto& b : truth) tp.push_back(b.p);
      Text json, csv;
      check(s2s_eval(pp.data(), pp.size(), tp.data(), tp.size(), cfg.p, category_map_or_null(g), json.out(),
                     csv.out()),
            "eval");
      if (g.out.empty()) {
        std::cout << json.str();
      } else {
        write_file(fs::path(g.out) / "metrics.json", json.str());
        write_file(fs::path(g.out) / "metrics.csv", csv.str());
      }
      return 0;
    }

    Bundle b = open_bundle(bundle);
    Text t;
    if (*ingest) {
      if (!g.out.empty()) check(s2s_bundle_write(b.p, g.out.c_str()), "ingest");
      check(s2s_bundle_summary_json(b.p, t.out()), "ingest");
      std::cout << t.str();
    } else if (*match) {
      check(s2s_match_json(b.p, cfg.p, t.out()), "match");
      emit(g, t.str());
    } else if (*align) {
      check(s2s_align_json(b.p, cfg.p, t.out()), "align");
      emit(g, t.str());
    } else if (*scenegraph) {
      check(s2s_scenegraph_json(b.p, cfg.p, t.out()), "scenegraph");
      emit(g, t.str());
    } else if (*optimize) {
      Result r;
      check(s2s_pipeline_run(b.p, cfg.p, &r.p), "optimize");
      check(s2s_result_optimization_json(r.p, t.out()), "optimize");
      emit(g, t.str());
      if (!moves_csv.empty()) {
        Text csv;
        check(s2s_result_moves_csv(r.p, csv.out()), "optimize");
        write_file(moves_csv, csv.str());
      }
    } else if (*exporter) {
      require_out(g, "export");
      Result r;
      check(s2s_pipeline_run(b.p, cfg.p, &r.p), "export");
      check(s2s_result_write(b.p, r.p, g.out.c_str()), "export");
      check(s2s_result_outcomes_json(r.p, t.out()), "export");
      std::cout << t.str();
    } else if (*augment) {
      require_out(g, "augment");
      Bundle out;
      check(s2s_augment(b.p, k, g.seed, cfg.p, &out.p), "augment");
      check(s2s_bundle_write(out.p, g.out.c_str()), "augment");
      check(s2s_bundle_summary_json(out.p, t.out()), "augment");
      std::cout << t.str();
    } else if (*micro) {
      check(s2s_microscenes_json(b.p, cfg.p, category_map_or_null(g), t.out()), "microscene");
      emit(g, t.str());
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << s2s_status_name(f.status) << ": " << f.message << "\n";
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(S2S_E_IO);
  }
  return 0;
}
