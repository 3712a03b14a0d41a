#include "json_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace s2s::json_io {

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::kMalformed, "expected [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json box(const Aabb& b) { return json{{"min", vec3(b.min)}, {"max", vec3(b.max)}}; }

Aabb box(const json& j) { return Aabb{vec3(j.at("min")), vec3(j.at("max"))}; }

json pose(const PoseTransform& t) {
  return json{{"translation", vec3(t.translation)},
              {"scale", t.scale},
              {"yaw", t.yaw},
              {"yaw_degrees", t.yaw * 180.0 / std::numbers::pi}};
}

PoseTransform pose(const json& j) {
  PoseTransform t;
  t.translation = vec3(j.at("translation"));
  t.scale = j.at("scale").get<double>();
  if (j.contains("yaw")) {
    t.yaw = j.at("yaw").get<double>();
  } else {
    t.yaw = j.at("yaw_degrees").get<double>() * std::numbers::pi / 180.0;
  }
  if (std::isfinite(t.yaw)) t.yaw = normalize_angle(t.yaw);
  return t;
}

json record(const AnnotationRecord& r) {
  return json{{"record_id", r.record_id}, {"object_id", r.object_id},     {"best_asset_id", r.best_asset_id},
              {"transform", pose(r.transform)}, {"ranking", r.ranking}, {"annotator_id", r.annotator_id},
              {"timestamp", r.timestamp}};
}

AnnotationRecord record(const json& j) {
  AnnotationRecord r;
  r.record_id = j.value("record_id", "");
  r.object_id = j.at("object_id").get<std::string>();
  r.best_asset_id = j.at("best_asset_id").get<std::string>();
  r.transform = pose(j.at("transform"));
  r.ranking = j.at("ranking").get<std::vector<std::string>>();
  r.annotator_id = j.at("annotator_id").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  return r;
}

json graph(const SceneGraph& g) {
  json relations = json::array();
  for (const auto& r : g.relations) {
    relations.push_back(json{{"kind", relation_kind_name(r.kind)}, {"parent", r.parent}, {"child", r.child}});
  }
  return json{{"nodes", g.nodes}, {"relations", std::move(relations)}, {"floor_supported", g.floor_supported}};
}

SceneGraph graph(const json& j) {
  SceneGraph g;
  try {
    g.nodes = j.value("nodes", std::vector<std::string>{});
    for (const auto& r : j.at("relations")) {
      Relation rel;
      rel.kind = parse_relation_kind(r.at("kind").get<std::string>());
      rel.parent = r.at("parent").get<std::string>();
      rel.child = r.at("child").get<std::string>();
      g.relations.push_back(std::move(rel));
    }
    g.floor_supported = j.value("floor_supported", std::vector<std::string>{});
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("graph: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::kMalformed, std::string("graph: ") + e.what());
  }
  return g;
}

json polygon(const FloorPolygon& p) {
  json out = json::array();
  for (const auto& v : p.vertices) out.push_back(json::array({v.x(), v.y()}));
  return out;
}

FloorPolygon polygon(const json& j) {
  FloorPolygon p;
  if (!j.is_array()) fail(ErrorCode::kMalformed, "floor: expected a list of [x, y]");
  for (const auto& v : j) {
    if (!v.is_array() || v.size() != 2) fail(ErrorCode::kMalformed, "floor: expected [x, y]");
    p.vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  return p;
}

json parse(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformed, context + ": " + e.what());
  }
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingFile, "missing file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_file(const std::filesystem::path& path) { return parse(read_bytes(path), path.string()); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace s2s::json_io
