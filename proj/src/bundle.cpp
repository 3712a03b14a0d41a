#include "s2s/bundle.hpp"

#include "json_io.hpp"
#include "s2s/category_map.hpp"
#include "s2s/embedding_io.hpp"
#include "s2s/error.hpp"
#include "s2s/ply.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

namespace s2s {
namespace fs = std::filesystem;
using json_io::json;

namespace {

// Bundle-relative, no absolute paths or parent hops.
void check_ref_shape(const std::string& ref) {
  const fs::path p(ref);
  if (ref.empty() || p.is_absolute()) fail(ErrorCode::kMalformed, "file reference must be relative: '" + ref + "'");
  for (const auto& part : p) {
    if (part == "..") fail(ErrorCode::kMalformed, "file reference leaves the bundle: '" + ref + "'");
  }
}

fs::path resolve_ref(const fs::path& root, const std::string& ref) {
  check_ref_shape(ref);
  const fs::path full = root / ref;
  if (!fs::is_regular_file(full)) fail(ErrorCode::kMissingFile, "missing file: " + full.string());
  return full;
}

PointCloud load_cloud(const fs::path& root, const std::string& ref) {
  PointCloud cloud = read_ply(resolve_ref(root, ref));
  try {
    validate_cloud(cloud);
  } catch (const Error& e) {
    fail(ErrorCode::kMalformed, ref + ": " + e.what());
  }
  return cloud;
}

Embedding unit_row(const Eigen::VectorXd& row, const std::string& what) {
  try {
    return Embedding::unit(row);
  } catch (const Error&) {
    fail(ErrorCode::kMalformed, what + ": zero or non-finite embedding");
  }
}

struct EmbeddingLookup {
  std::vector<EmbeddingTable> tables;

  const Eigen::VectorXd* find(const std::string& kind, const std::string& id) const {
    for (const auto& t : tables) {
      if (const auto* row = t.find(kind, id)) return row;
    }
    return nullptr;
  }
  std::uint32_t dim() const { return tables.empty() ? 0 : tables.front().dim; }
};


void parse_object(const json& o, const fs::path& root, const EmbeddingLookup& emb, SceneBundle& b,
                  BundleObject& out) {
  out.id = o.at("id").get<std::string>();
  if (out.id.empty()) fail(ErrorCode::kMalformed, "object id must be non-empty");
  out.category = o.value("category", std::string(kFallbackCategory));
  out.scan_ref = o.at("scan").get<std::string>();
  out.scan = load_cloud(root, out.scan_ref);
  if (o.contains("image") && !o.at("image").is_null()) {
    out.image_ref = o.at("image").get<std::string>();
    resolve_ref(root, *out.image_ref);
  }
  if (o.contains("caption") && !o.at("caption").is_null()) out.caption = o.at("caption").get<std::string>();

  auto& set = out.candidates;
  set.scene_id = b.scene_id;
  set.object_id = out.id;
  const auto& cands = o.at("candidates");
  if (!cands.is_array() || cands.size() < 2)
    fail(ErrorCode::kValidation, out.id + ": needs at least 2 candidates");
  std::set<std::string> asset_ids;
  for (const auto& c : cands) {
    Candidate cand;
    cand.asset_id = c.at("asset_id").get<std::string>();
    if (!asset_ids.insert(cand.asset_id).second)
      fail(ErrorCode::kDuplicateId, out.id + ": duplicate candidate asset '" + cand.asset_id + "'");
    cand.cloud_ref = c.at("cloud").get<std::string>();
    cand.provenance = c.value("provenance", "");
    cand.scene_id = b.scene_id;
    if (!b.asset_clouds.count(cand.cloud_ref)) b.asset_clouds[cand.cloud_ref] = load_cloud(root, cand.cloud_ref);
    const auto* row = emb.find("point", cand.asset_id);
    if (!row) fail(ErrorCode::kMalformed, out.id + ": no point embedding for asset '" + cand.asset_id + "'");
    cand.embedding = unit_row(*row, "asset " + cand.asset_id);
    set.candidates.push_back(std::move(cand));
  }
  if (const auto* row = emb.find("image", out.id)) set.image_query = unit_row(*row, out.id + " image");
  if (const auto* row = emb.find("text", out.id)) set.text_query = unit_row(*row, out.id + " text");

  auto index_of = [&](const std::string& asset, const char* field) {
    for (std::size_t k = 0; k < set.candidates.size(); ++k) {
      if (set.candidates[k].asset_id == asset) return k;
    }
    fail(ErrorCode::kValidation, out.id + ": " + field + " '" + asset + "' is not a candidate");
  };
  if (o.contains("truth") && !o.at("truth").is_null()) set.truth_index = index_of(o.at("truth").get<std::string>(), "truth");
  try {
    set.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDimensionMismatch) throw;
    fail(ErrorCode::kValidation, e.what());
  }

  if (o.contains("placement") && !o.at("placement").is_null()) {
    const auto& p = o.at("placement");
    Placement pl;
    pl.asset_id = p.at("asset_id").get<std::string>();
    index_of(pl.asset_id, "placement asset");
    pl.transform = json_io::pose(p);
    if (!(pl.transform.scale > 0.0) || !pl.transform.translation.allFinite())
      fail(ErrorCode::kValidation, out.id + ": invalid placement transform");
    out.placement = pl;
  }
  if (o.contains("box") && !o.at("box").is_null()) out.box = json_io::box(o.at("box"));
  if (o.contains("ranking")) {
    out.ranking = o.at("ranking").get<std::vector<std::string>>();
    for (const auto& a : out.ranking) index_of(a, "ranking entry");
  }
  out.status = o.value("status", "");
}

}  // namespace

const Candidate* BundleObject::candidate(const std::string& asset_id) const {
  for (const auto& c : candidates.candidates) {
    if (c.asset_id == asset_id) return &c;
  }
  return nullptr;
}

std::optional<std::string> BundleObject::truth_asset() const {
  if (!candidates.truth_index) return std::nullopt;
  return candidates.candidates[*candidates.truth_index].asset_id;
}

int SceneBundle::find(const std::string& object_id) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].id == object_id) return static_cast<int>(i);
  }
  return -1;
}

const PointCloud& SceneBundle::asset_cloud(const std::string& ref) const {
  const auto it = asset_clouds.find(ref);
  if (it == asset_clouds.end()) fail(ErrorCode::kNotFound, "asset cloud not loaded: " + ref);
  return it->second;
}

SceneLayout SceneBundle::scan_layout() const {
  SceneLayout s;
  s.scene_id = scene_id;
  s.floor = floor;
  s.floor_z = floor_z;
  for (const auto& o : objects) {
    SceneObject so;
    so.id = o.id;
    so.category = o.category;
    so.box = o.scan_box();
    s.objects.push_back(std::move(so));
  }
  return s;
}

SceneLayout SceneBundle::placed_layout() const {
  SceneLayout s = scan_layout();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    auto& so = s.objects[i];
    if (o.box) so.box = *o.box;
    if (!o.placement) continue;
    so.asset_id = o.placement->asset_id;
    so.pose = o.placement->transform;
    if (!o.box) {
      const auto* c = o.candidate(o.placement->asset_id);
      so.box = Aabb::of(apply_transform(asset_cloud(c->cloud_ref), o.placement->transform));
    }
  }
  return s;
}

fs::path resolve_bundle_path(const fs::path& path) {
  if (path.is_absolute()) return path;
  if (const char* env = std::getenv(kDataRootEnv); env && *env) return fs::path(env) / path;
  return path;
}

SceneBundle ingest(const fs::path& path) {
  SceneBundle b;
  b.root = resolve_bundle_path(path);
  const fs::path manifest = b.root / kManifestName;
  if (!fs::is_regular_file(manifest)) fail(ErrorCode::kMissingFile, "missing manifest: " + manifest.string());
  const json j = json_io::read_file(manifest);
  try {
    b.scene_id = j.at("scene_id").get<std::string>();
    if (b.scene_id.empty()) fail(ErrorCode::kMalformed, "scene_id must be non-empty");
    b.floor_z = j.value("floor_z", 0.0);

    EmbeddingLookup emb;
    for (const auto& ref : j.value("embeddings", std::vector<std::string>{})) {
      emb.tables.push_back(read_embedding_table(resolve_ref(b.root, ref)));
      if (emb.tables.back().dim != emb.dim())
        fail(ErrorCode::kDimensionMismatch, ref + ": embedding dimension " + std::to_string(emb.tables.back().dim) +
                                                " differs from " + std::to_string(emb.dim()));
      b.embedding_refs.push_back(ref);
    }
    if (j.contains("scorer") && !j.at("scorer").is_null()) {
      b.scorer_ref = j.at("scorer").get<std::string>();
      b.scorer = PointScorerWeights::from_json(json_io::read_bytes(resolve_ref(b.root, *b.scorer_ref)));
      if (emb.dim() != 0 && static_cast<std::uint32_t>(b.scorer->weights.size()) != emb.dim())
        fail(ErrorCode::kDimensionMismatch, "scorer weights differ from embedding dimension");
    }

    std::set<std::string> ids;
    for (const auto& o : j.at("objects")) {
      BundleObject obj;
      parse_object(o, b.root, emb, b, obj);
      if (!ids.insert(obj.id).second) fail(ErrorCode::kDuplicateId, "duplicate object id '" + obj.id + "'");
      b.objects.push_back(std::move(obj));
    }

    if (j.contains("floor") && !j.at("floor").is_null()) {
      b.floor = json_io::polygon(j.at("floor"));
      if (b.floor.vertices.size() < 3 || !(std::abs(signed_area(b.floor.vertices)) > 0.0))
        fail(ErrorCode::kMalformed, "floor polygon needs 3 or more vertices and nonzero area");
      if (signed_area(b.floor.vertices) < 0) std::reverse(b.floor.vertices.begin(), b.floor.vertices.end());
      b.floor_given = true;
    } else if (!b.objects.empty()) {
      const auto layout = b.scan_layout();
      b.floor = estimate_floor_plan(layout.boxes());
    }

    if (j.contains("graph") && !j.at("graph").is_null()) b.graph = json_io::graph(j.at("graph"));
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformed, manifest.string() + ": " + e.what());
  }

  const fs::path ann = b.root / kAnnotationsName;
  if (fs::is_regular_file(ann)) {
    b.annotations = AnnotationStore::from_json(json_io::read_bytes(ann));
    for (const auto& [id, rec] : b.annotations.latest) {
      const int i = b.find(id);
      if (i < 0) fail(ErrorCode::kValidation, "annotation for unknown object '" + id + "'");
      std::vector<std::string> cands;
      for (const auto& c : b.objects[static_cast<std::size_t>(i)].candidates.candidates) cands.push_back(c.asset_id);
      const auto errors = validate_annotation(rec, cands);
      if (!errors.empty())
        fail(ErrorCode::kValidation, "annotation for '" + id + "': " + errors.begin()->first + " " +
                                         errors.begin()->second);
    }
  }
  return b;
}

std::string manifest_json(const SceneBundle& b) {
  json j;
  j["v"] = 1;
  j["scene_id"] = b.scene_id;
  j["floor_z"] = b.floor_z;
  if (b.floor_given) j["floor"] = json_io::polygon(b.floor);
  j["embeddings"] = b.embedding_refs;
  if (b.scorer_ref) j["scorer"] = *b.scorer_ref;
  j["objects"] = json::array();
  for (const auto& o : b.objects) {
    json oj;
    oj["id"] = o.id;
    oj["category"] = o.category;
    oj["scan"] = o.scan_ref;
    if (o.image_ref) oj["image"] = *o.image_ref;
    if (o.caption) oj["caption"] = *o.caption;
    if (const auto truth = o.truth_asset()) oj["truth"] = *truth;
    oj["candidates"] = json::array();
    for (const auto& c : o.candidates.candidates) {
      oj["candidates"].push_back(json{{"asset_id", c.asset_id}, {"cloud", c.cloud_ref}, {"provenance", c.provenance}});
    }
    if (o.placement) {
      json p = json_io::pose(o.placement->transform);
      p["asset_id"] = o.placement->asset_id;
      oj["placement"] = std::move(p);
    }
    if (o.box) oj["box"] = json_io::box(*o.box);
    if (!o.ranking.empty()) oj["ranking"] = o.ranking;
    if (!o.status.empty()) oj["status"] = o.status;
    j["objects"].push_back(std::move(oj));
  }
  if (b.graph) {
    j["graph"] = json_io::graph(*b.graph);
  }
  return json_io::dump(j);
}

void write_bundle(const SceneBundle& b, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::set<std::string> refs;
  for (const auto& o : b.objects) {
    refs.insert(o.scan_ref);
    if (o.image_ref) refs.insert(*o.image_ref);
    for (const auto& c : o.candidates.candidates) refs.insert(c.cloud_ref);
  }
  for (const auto& e : b.embedding_refs) {
    refs.insert(e);
    refs.insert(fs::relative(sidecar_path(b.root / e), b.root).generic_string());
  }
  if (b.scorer_ref) refs.insert(*b.scorer_ref);

  std::error_code ec;
  const bool same_dir = fs::exists(out_dir) && fs::exists(b.root) && fs::equivalent(out_dir, b.root, ec);
  if (!same_dir) {
    for (const auto& ref : refs) {
      const fs::path src = resolve_ref(b.root, ref);
      const fs::path dst = out_dir / ref;
      fs::create_directories(dst.parent_path());
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing, ec);
      if (ec) fail(ErrorCode::kIo, "cannot copy " + src.string() + ": " + ec.message());
    }
  }
  json_io::write_atomic(out_dir / kManifestName, manifest_json(b));
  if (!b.annotations.empty()) json_io::write_atomic(out_dir / kAnnotationsName, b.annotations.to_json());
}

std::vector<fs::path> list_bundles(const fs::path& root) {
  if (!fs::is_directory(root)) fail(ErrorCode::kMissingFile, "not a directory: " + root.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::is_regular_file(entry.path() / kManifestName)) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string quadruple_json(const SceneBundle& b, const BundleObject& o, const AnnotationRecord& rec) {
  auto vec = [](const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
  };
  json j;
  j["v"] = 1;
  j["scene_id"] = b.scene_id;
  j["object_id"] = o.id;
  j["image"] = o.image_ref ? json(*o.image_ref) : json(nullptr);
  j["text"] = o.caption ? json(*o.caption) : json(nullptr);
  j["image_query"] = o.candidates.image_query ? vec(o.candidates.image_query->values) : json(nullptr);
  j["text_query"] = o.candidates.text_query ? vec(o.candidates.text_query->values) : json(nullptr);
  j["candidates"] = json::array();
  std::optional<std::size_t> truth;
  for (std::size_t k = 0; k < o.candidates.candidates.size(); ++k) {
    const auto& c = o.candidates.candidates[k];
    if (c.asset_id == rec.best_asset_id) truth = k;
    j["candidates"].push_back(json{{"asset_id", c.asset_id},
                                   {"cloud", c.cloud_ref},
                                   {"provenance", c.provenance},
                                   {"embedding", vec(c.embedding.values)}});
  }
  if (!truth) fail(ErrorCode::kValidation, o.id + ": annotated best asset is not a candidate");
  j["truth_index"] = *truth;
  j["transform"] = json_io::pose(rec.transform);
  j["ranking"] = rec.ranking;
  j["annotator_id"] = rec.annotator_id;
  j["record_id"] = rec.record_id;
  return j.dump();
}

CandidateSet candidate_set_from_quadruple(const std::string& text) {
  const json j = json_io::parse(text, "quadruple");
  CandidateSet set;
  try {
    auto vec = [](const json& a) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
      for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
      return v;
    };
    set.scene_id = j.at("scene_id").get<std::string>();
    set.object_id = j.at("object_id").get<std::string>();
    for (const auto& c : j.at("candidates")) {
      Candidate cand;
      cand.asset_id = c.at("asset_id").get<std::string>();
      cand.cloud_ref = c.value("cloud", "");
      cand.provenance = c.value("provenance", "");
      cand.scene_id = set.scene_id;
      cand.embedding = unit_row(vec(c.at("embedding")), cand.asset_id);
      set.candidates.push_back(std::move(cand));
    }
    if (!j.at("image_query").is_null()) set.image_query = unit_row(vec(j.at("image_query")), "image query");
    if (!j.at("text_query").is_null()) set.text_query = unit_row(vec(j.at("text_query")), "text query");
    set.truth_index = j.at("truth_index").get<std::size_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("quadruple: ") + e.what());
  }
  try {
    set.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kValidation, e.what());
  }
  return set;
}

}  // namespace s2s
