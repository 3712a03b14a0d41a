#pragma once

// Local annotation backend. Every scene bundle below a root directory is
// loaded at start; objects are addressed as "<scene>:<object>" or by a bare
// object id when that id is unique across the root.
//
//   GET  /scenes
//   GET  /scenes/{scene}/objects
//   GET  /objects/{id}?max_points=N          scan downsample, image ref, caption
//   GET  /objects/{id}/candidates?max_points=N
//   POST /objects/{id}/annotation            422 with per-field reasons
//   GET  /qc/{batch}/sample?seed=S           batch = scene id or "all"
//   POST /qc/{batch}/verdicts                {"seed": S, "verdicts": {record_id: bool}}
//   GET  /export/training
//
// Every payload carries "v": 1. Reads share a per-scene lock; writes take it
// exclusively and replace annotations.json through a temporary file.

#include "s2s/annotation.hpp"
#include "s2s/bundle.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace s2s {

inline constexpr double kQcSampleFraction = 0.10;
inline constexpr double kQcPassThreshold = 0.98;  // exclusive
inline constexpr std::size_t kMaxServedPoints = 50000;
inline constexpr std::size_t kDefaultServedPoints = 2048;

// ceil(0.10 * n).
std::size_t qc_sample_size(std::size_t batch_size);
// pass / sampled > 0.98, decided in integers.
bool qc_accepted(std::size_t pass_count, std::size_t sampled);
// Seeded draw of qc_sample_size ids, returned sorted. Throws kPrecondition for an empty batch.
std::vector<std::string> qc_sample(std::vector<std::string> batch, std::uint64_t seed);

struct QcBatchReport {
  std::string batch_id;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;
  std::vector<std::string> sampled;
  std::size_t pass_count = 0;
  double pass_rate = 0.0;
  bool accepted = false;
  bool complete = false;  // verdicts received

  std::string to_json() const;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class ReviewService {
 public:
  // Throws kMissingFile for a missing root and kDuplicateId when two bundles
  // share a scene id; bundle ingest errors propagate.
  explicit ReviewService(std::filesystem::path root);
  ~ReviewService();

  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query, const std::string& body);

  // Quadruple file: {"v": 1, "quadruples": [..], "missing": ["<scene>:<object>", ..]}.
  std::string export_training() const;

  const std::filesystem::path& root() const { return root_; }

 private:
  struct Scene;
  struct ObjectRef {
    Scene* scene = nullptr;
    std::size_t index = 0;
  };

  ObjectRef resolve(const std::string& id) const;
  std::vector<std::string> batch_ids(const std::string& batch) const;

  HttpResponse get_scenes() const;
  HttpResponse get_scene_objects(const std::string& scene_id) const;
  HttpResponse get_object(const std::string& id, std::size_t max_points) const;
  HttpResponse get_candidates(const std::string& id, std::size_t max_points) const;
  HttpResponse post_annotation(const std::string& id, const std::string& body);
  HttpResponse get_qc_sample(const std::string& batch, std::uint64_t seed) const;
  HttpResponse post_qc_verdicts(const std::string& batch, const std::string& body);

  std::filesystem::path root_;
  std::map<std::string, std::unique_ptr<Scene>> scenes_;
  std::mutex qc_mutex_;
};

// HTTP front end on cpp-httplib. Port 0 picks a free port.
class ReviewServer {
 public:
  explicit ReviewServer(std::filesystem::path root);
  ~ReviewServer();

  // Binds and starts serving on a background thread; returns the bound port.
  // Throws kIo when the port cannot be bound.
  int start(const std::string& host, int port);
  // Blocks until stop() is called from another thread.
  void wait();
  void stop();

  ReviewService& service() { return *service_; }

 private:
  struct Impl;
  std::unique_ptr<ReviewService> service_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace s2s
