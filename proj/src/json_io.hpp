#pragma once

// JSON codecs shared by the bundle, pipeline and service sources.

#include "s2s/annotation.hpp"
#include "s2s/error.hpp"
#include "s2s/geometry.hpp"
#include "s2s/scene_graph.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace s2s::json_io {

using json = nlohmann::json;

json vec3(const Vec3& v);
Vec3 vec3(const json& j);

json box(const Aabb& b);
Aabb box(const json& j);

json pose(const PoseTransform& t);
PoseTransform pose(const json& j);

json record(const AnnotationRecord& r);
AnnotationRecord record(const json& j);

json graph(const SceneGraph& g);
SceneGraph graph(const json& j);

json polygon(const FloorPolygon& p);
FloorPolygon polygon(const json& j);

// Parse errors become kMalformed with the given context prefix.
json parse(const std::string& text, const std::string& context);
json read_file(const std::filesystem::path& path);

// Sorted keys, two-space indent, trailing newline.
std::string dump(const json& j);

// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

std::string read_bytes(const std::filesystem::path& path);

}  // namespace s2s::json_io
