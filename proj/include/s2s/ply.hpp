#pragma once

#include "s2s/geometry.hpp"

#include <filesystem>
#include <string>

namespace s2s {

// Binary little-endian PLY with float32 x,y,z and optional uint8 red,green,blue.
// The reader also accepts double coordinates, extra vertex properties and
// trailing non-vertex elements, which it skips.
PointCloud read_ply(const std::filesystem::path& path);
PointCloud parse_ply(const std::string& bytes);

void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
std::string serialize_ply(const PointCloud& cloud);

}  // namespace s2s
