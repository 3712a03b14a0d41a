#include "s2s/review_service.hpp"

#include "json_io.hpp"
#include "s2s/error.hpp"
#include "s2s/rng.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <mutex>
#include <thread>

namespace s2s {
namespace fs = std::filesystem;
using json_io::json;

namespace {

constexpr int kThumbnailSize = 32;

HttpResponse json_response(int status, const json& j) { return HttpResponse{status, j.dump(), "application/json"}; }

HttpResponse error_response(int status, const std::string& code, const std::string& message) {
  return json_response(status, json{{"v", 1}, {"error", code}, {"message", message}});
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kMissingFile: return 404;
    case ErrorCode::kValidation: return 422;
    case ErrorCode::kConflict:
    case ErrorCode::kDuplicateId: return 409;
    case ErrorCode::kMalformed:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kPrecondition:
    case ErrorCode::kDimensionMismatch: return 400;
    default: return 500;
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

json cloud_payload(const PointCloud& cloud, std::size_t max_points) {
  const PointCloud sample = farthest_point_sample(cloud, max_points);
  json points = json::array();
  for (const auto& p : sample.points) points.push_back(json::array({p.x(), p.y(), p.z()}));
  json out{{"count", cloud.size()}, {"points", std::move(points)}};
  if (sample.has_colors()) {
    json colors = json::array();
    for (const auto& c : sample.colors) colors.push_back(json::array({c.x(), c.y(), c.z()}));
    out["colors"] = std::move(colors);
  }
  return out;
}

// Orthographic top view: per cell the highest point, scaled to 1..255 (0 = empty).
json top_view(const PointCloud& cloud) {
  const Aabb box = Aabb::of(cloud);
  const Vec3 e = box.extent();
  const double span = std::max({e.x(), e.y(), 1e-12});
  const double height = std::max(e.z(), 1e-12);
  std::vector<int> cells(kThumbnailSize * kThumbnailSize, 0);
  for (const auto& p : cloud.points) {
    const int cx = std::min(kThumbnailSize - 1, static_cast<int>((p.x() - box.min.x()) / span * kThumbnailSize));
    const int cy = std::min(kThumbnailSize - 1, static_cast<int>((p.y() - box.min.y()) / span * kThumbnailSize));
    const int v = 1 + static_cast<int>(std::lround(254.0 * (p.z() - box.min.z()) / height));
    int& cell = cells[static_cast<std::size_t>(cy * kThumbnailSize + cx)];
    cell = std::max(cell, v);
  }
  return json{{"width", kThumbnailSize}, {"height", kThumbnailSize}, {"top_view", cells}};
}

std::size_t parse_max_points(const std::map<std::string, std::string>& query) {
  const auto it = query.find("max_points");
  if (it == query.end()) return kDefaultServedPoints;
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(it->second, &pos);
  } catch (const std::exception&) {
    fail(ErrorCode::kMalformed, "max_points must be a positive integer");
  }
  if (pos != it->second.size() || v == 0) fail(ErrorCode::kMalformed, "max_points must be a positive integer");
  return std::min<std::size_t>(v, kMaxServedPoints);
}

// Reads an annotation body field by field so every problem gets its own reason.
AnnotationRecord parse_annotation_body(const json& j, const std::string& object_id,
                                       std::map<std::string, std::string>& errors) {
  AnnotationRecord r;
  r.object_id = object_id;
  auto string_field = [&](const char* key, std::string& out) {
    if (!j.contains(key)) {
      errors[key] = "required";
    } else if (!j.at(key).is_string()) {
      errors[key] = "must be a string";
    } else {
      out = j.at(key).get<std::string>();
    }
  };
  string_field("best_asset_id", r.best_asset_id);
  string_field("annotator_id", r.annotator_id);
  string_field("timestamp", r.timestamp);
  if (!j.contains("ranking")) {
    errors["ranking"] = "required";
  } else if (!j.at("ranking").is_array() ||
             !std::all_of(j.at("ranking").begin(), j.at("ranking").end(), [](const json& x) { return x.is_string(); })) {
    errors["ranking"] = "must be a list of asset ids";
  } else {
    r.ranking = j.at("ranking").get<std::vector<std::string>>();
  }
  if (!j.contains("transform")) {
    errors["transform"] = "required";
  } else {
    try {
      r.transform = json_io::pose(j.at("transform"));
    } catch (const std::exception&) {
      errors["transform"] = "expects translation [x, y, z], scale and yaw or yaw_degrees";
    }
  }
  return r;
}

}  // namespace

std::size_t qc_sample_size(std::size_t batch_size) { return (batch_size + 9) / 10; }

bool qc_accepted(std::size_t pass_count, std::size_t sampled) {
  // pass / sampled > 49 / 50
  return sampled > 0 && 50 * pass_count > 49 * sampled;
}

std::vector<std::string> qc_sample(std::vector<std::string> batch, std::uint64_t seed) {
  if (batch.empty()) fail(ErrorCode::kPrecondition, "qc: empty batch");
  std::sort(batch.begin(), batch.end());
  Rng rng(seed);
  std::vector<std::string> out;
  for (const auto i : rng.sample_without_replacement(batch.size(), qc_sample_size(batch.size()))) out.push_back(batch[i]);
  std::sort(out.begin(), out.end());
  return out;
}

std::string QcBatchReport::to_json() const {
  return json{{"v", 1},
              {"batch_id", batch_id},
              {"seed", seed},
              {"batch_size", batch_size},
              {"sampled", sampled},
              {"pass_count", pass_count},
              {"pass_rate", pass_rate},
              {"accepted", accepted},
              {"complete", complete}}
      .dump();
}

struct ReviewService::Scene {
  fs::path dir;
  SceneBundle bundle;
  mutable std::shared_mutex mutex;
};

ReviewService::ReviewService(fs::path root) : root_(std::move(root)) {
  for (const auto& dir : list_bundles(root_)) {
    auto scene = std::make_unique<Scene>();
    scene->dir = dir;
    scene->bundle = ingest(dir);
    const std::string id = scene->bundle.scene_id;
    if (!scenes_.emplace(id, std::move(scene)).second) fail(ErrorCode::kDuplicateId, "duplicate scene id '" + id + "'");
  }
}

ReviewService::~ReviewService() = default;

ReviewService::ObjectRef ReviewService::resolve(const std::string& id) const {
  const auto colon = id.find(':');
  if (colon != std::string::npos) {
    const auto it = scenes_.find(id.substr(0, colon));
    if (it != scenes_.end()) {
      const int i = it->second->bundle.find(id.substr(colon + 1));
      if (i >= 0) return {it->second.get(), static_cast<std::size_t>(i)};
    }
    fail(ErrorCode::kNotFound, "unknown object '" + id + "'");
  }
  ObjectRef found;
  int matches = 0;
  for (const auto& [sid, scene] : scenes_) {
    const int i = scene->bundle.find(id);
    if (i >= 0) {
      found = {scene.get(), static_cast<std::size_t>(i)};
      ++matches;
    }
  }
  if (matches == 0) fail(ErrorCode::kNotFound, "unknown object '" + id + "'");
  if (matches > 1) fail(ErrorCode::kConflict, "object id '" + id + "' is ambiguous; use <scene>:<object>");
  return found;
}

HttpResponse ReviewService::handle(const std::string& method, const std::string& path,
                                   const std::map<std::string, std::string>& query, const std::string& body) {
  const auto p = split_path(path);
  const bool get = method == "GET", post = method == "POST";
  try {
    if (p.size() == 1 && p[0] == "scenes") {
      if (get) return get_scenes();
    } else if (p.size() == 3 && p[0] == "scenes" && p[2] == "objects") {
      if (get) return get_scene_objects(p[1]);
    } else if (p.size() == 2 && p[0] == "objects") {
      if (get) return get_object(p[1], parse_max_points(query));
    } else if (p.size() == 3 && p[0] == "objects" && p[2] == "candidates") {
      if (get) return get_candidates(p[1], parse_max_points(query));
    } else if (p.size() == 3 && p[0] == "objects" && p[2] == "annotation") {
      if (post) return post_annotation(p[1], body);
    } else if (p.size() == 3 && p[0] == "qc" && p[2] == "sample") {
      if (get) {
        const auto it = query.find("seed");
        std::uint64_t seed = 0;
        if (it != query.end()) {
          std::size_t pos = 0;
          try {
            seed = std::stoull(it->second, &pos);
          } catch (const std::exception&) {
            pos = 0;
          }
          if (pos == 0 || pos != it->second.size()) fail(ErrorCode::kMalformed, "seed must be an unsigned integer");
        }
        return get_qc_sample(p[1], seed);
      }
    } else if (p.size() == 3 && p[0] == "qc" && p[2] == "verdicts") {
      if (post) return post_qc_verdicts(p[1], body);
    } else if (p.size() == 2 && p[0] == "export" && p[1] == "training") {
      if (get) return HttpResponse{200, export_training(), "application/json"};
    } else {
      return error_response(404, "E_NOT_FOUND", "no route for " + path);
    }
    return error_response(405, "E_METHOD", method + " not allowed on " + path);
  } catch (const Error& e) {
    return error_response(http_status(e.code()), error_code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "E_UNKNOWN", e.what());
  }
}

HttpResponse ReviewService::get_scenes() const {
  json list = json::array();
  for (const auto& [id, scene] : scenes_) {
    std::shared_lock lock(scene->mutex);
    list.push_back(json{{"scene_id", id},
                        {"objects", scene->bundle.objects.size()},
                        {"annotated", scene->bundle.annotations.latest.size()}});
  }
  return json_response(200, json{{"v", 1}, {"scenes", std::move(list)}});
}

HttpResponse ReviewService::get_scene_objects(const std::string& scene_id) const {
  const auto it = scenes_.find(scene_id);
  if (it == scenes_.end()) fail(ErrorCode::kNotFound, "unknown scene '" + scene_id + "'");
  const auto& scene = *it->second;
  std::shared_lock lock(scene.mutex);
  json list = json::array();
  for (const auto& o : scene.bundle.objects) {
    list.push_back(json{{"id", scene_id + ":" + o.id},
                        {"object_id", o.id},
                        {"category", o.category},
                        {"candidates", o.candidates.candidates.size()},
                        {"annotated", scene.bundle.annotations.latest.count(o.id) > 0}});
  }
  return json_response(200, json{{"v", 1}, {"scene_id", scene_id}, {"objects", std::move(list)}});
}

HttpResponse ReviewService::get_object(const std::string& id, std::size_t max_points) const {
  const auto ref = resolve(id);
  std::shared_lock lock(ref.scene->mutex);
  const auto& b = ref.scene->bundle;
  const auto& o = b.objects[ref.index];
  json j{{"v", 1},
         {"id", b.scene_id + ":" + o.id},
         {"scene_id", b.scene_id},
         {"object_id", o.id},
         {"category", o.category},
         {"caption", o.caption ? json(*o.caption) : json(nullptr)},
         {"image", o.image_ref ? json(*o.image_ref) : json(nullptr)},
         {"box", json_io::box(o.scan_box())},
         {"scan", cloud_payload(o.scan, max_points)}};
  const auto it = b.annotations.latest.find(o.id);
  j["annotation"] = it == b.annotations.latest.end() ? json(nullptr) : json_io::record(it->second);
  return json_response(200, j);
}

HttpResponse ReviewService::get_candidates(const std::string& id, std::size_t max_points) const {
  const auto ref = resolve(id);
  std::shared_lock lock(ref.scene->mutex);
  const auto& b = ref.scene->bundle;
  const auto& o = b.objects[ref.index];
  json list = json::array();
  for (const auto& c : o.candidates.candidates) {
    const PointCloud& cloud = b.asset_cloud(c.cloud_ref);
    list.push_back(json{{"asset_id", c.asset_id},
                        {"provenance", c.provenance},
                        {"cloud_ref", c.cloud_ref},
                        {"cloud", cloud_payload(cloud, max_points)},
                        {"thumbnail", top_view(cloud)}});
  }
  return json_response(200, json{{"v", 1}, {"id", b.scene_id + ":" + o.id}, {"candidates", std::move(list)}});
}

HttpResponse ReviewService::post_annotation(const std::string& id, const std::string& body) {
  const auto ref = resolve(id);
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    return error_response(400, "E_MALFORMED", std::string("annotation body: ") + e.what());
  }
  if (!j.is_object()) return error_response(400, "E_MALFORMED", "annotation body must be an object");

  std::unique_lock lock(ref.scene->mutex);
  auto& b = ref.scene->bundle;
  const auto& o = b.objects[ref.index];
  std::map<std::string, std::string> errors;
  AnnotationRecord rec = parse_annotation_body(j, o.id, errors);
  std::vector<std::string> candidate_ids;
  for (const auto& c : o.candidates.candidates) candidate_ids.push_back(c.asset_id);
  for (auto& [field, reason] : validate_annotation(rec, candidate_ids)) errors.emplace(field, reason);
  if (!errors.empty()) {
    return json_response(422, json{{"v", 1}, {"error", "E_VALIDATION"}, {"fields", errors}});
  }
  AnnotationStore next = b.annotations;
  const AnnotationRecord stored = next.submit(b.scene_id, rec);
  json_io::write_atomic(ref.scene->dir / kAnnotationsName, next.to_json());
  b.annotations = std::move(next);
  return json_response(201, json{{"v", 1}, {"record_id", stored.record_id}, {"record", json_io::record(stored)}});
}

std::vector<std::string> ReviewService::batch_ids(const std::string& batch) const {
  std::vector<std::string> ids;
  for (const auto& [sid, scene] : scenes_) {
    if (batch != "all" && batch != sid) continue;
    std::shared_lock lock(scene->mutex);
    for (const auto& [oid, rec] : scene->bundle.annotations.latest) ids.push_back(rec.record_id);
  }
  if (batch != "all" && !scenes_.count(batch)) fail(ErrorCode::kNotFound, "unknown batch '" + batch + "'");
  return ids;
}

HttpResponse ReviewService::get_qc_sample(const std::string& batch, std::uint64_t seed) const {
  const auto ids = batch_ids(batch);
  if (ids.empty()) return error_response(422, "E_PRECONDITION", "batch '" + batch + "' has no annotations");
  QcBatchReport r;
  r.batch_id = batch;
  r.seed = seed;
  r.batch_size = ids.size();
  r.sampled = qc_sample(ids, seed);
  return HttpResponse{200, r.to_json(), "application/json"};
}

HttpResponse ReviewService::post_qc_verdicts(const std::string& batch, const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    return error_response(400, "E_MALFORMED", std::string("verdict body: ") + e.what());
  }
  std::map<std::string, std::string> errors;
  if (!j.is_object() || !j.contains("seed") || !j.at("seed").is_number_unsigned()) errors["seed"] = "required unsigned integer";
  if (!j.is_object() || !j.contains("verdicts") || !j.at("verdicts").is_object()) errors["verdicts"] = "required object";
  if (!errors.empty()) return json_response(422, json{{"v", 1}, {"error", "E_VALIDATION"}, {"fields", errors}});

  std::lock_guard lock(qc_mutex_);
  const auto ids = batch_ids(batch);
  if (ids.empty()) return error_response(422, "E_PRECONDITION", "batch '" + batch + "' has no annotations");
  QcBatchReport r;
  r.batch_id = batch;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.batch_size = ids.size();
  r.sampled = qc_sample(ids, r.seed);
  std::set<std::string> given;
  for (const auto& [rid, verdict] : j.at("verdicts").items()) {
    if (!verdict.is_boolean()) errors["verdicts." + rid] = "must be true or false";
    given.insert(rid);
    if (verdict.is_boolean() && verdict.get<bool>()) ++r.pass_count;
  }
  if (given != std::set<std::string>(r.sampled.begin(), r.sampled.end()))
    errors["verdicts"] = "must cover exactly the " + std::to_string(r.sampled.size()) + " sampled records";
  if (!errors.empty()) return json_response(422, json{{"v", 1}, {"error", "E_VALIDATION"}, {"fields", errors}});
  r.pass_rate = static_cast<double>(r.pass_count) / static_cast<double>(r.sampled.size());
  r.accepted = qc_accepted(r.pass_count, r.sampled.size());
  r.complete = true;
  fs::create_directories(root_ / "qc");
  json_io::write_atomic(root_ / "qc" / (batch + ".json"), r.to_json() + "\n");
  return HttpResponse{200, r.to_json(), "application/json"};
}

std::string ReviewService::export_training() const {
  json quads = json::array();
  json missing = json::array();
  for (const auto& [sid, scene] : scenes_) {
    std::shared_lock lock(scene->mutex);
    const auto& b = scene->bundle;
    for (const auto& o : b.objects) {
      const auto it = b.annotations.latest.find(o.id);
      if (it == b.annotations.latest.end()) {
        missing.push_back(sid + ":" + o.id);
      } else {
        quads.push_back(json::parse(quadruple_json(b, o, it->second)));
      }
    }
  }
  return json_io::dump(json{{"v", 1}, {"quadruples", std::move(quads)}, {"missing", std::move(missing)}});
}

struct ReviewServer::Impl {
  httplib::Server server;
  std::thread thread;
  std::mutex join_mutex;  // wait() and stop() may race from different threads
};

ReviewServer::ReviewServer(fs::path root)
    : service_(std::make_unique<ReviewService>(std::move(root))), impl_(std::make_unique<Impl>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const auto out = service_->handle(req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  // SO_REUSEADDR only: the library default SO_REUSEPORT would let a second
  // server share a port that is already in use.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) fail(ErrorCode::kIo, "cannot bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ReviewServer::wait() {
  std::lock_guard lock(impl_->join_mutex);
  if (impl_->thread.joinable()) impl_->thread.join();
}

void ReviewServer::stop() {
  impl_->server.stop();
  wait();
}

}  // namespace s2s
