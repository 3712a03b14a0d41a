#include "s2s/ply.hpp"

#include "s2s/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace s2s {
namespace {

static_assert(std::endian::native == std::endian::little, "PLY codec assumes a little-endian host");

struct Property {
  std::string name;
  std::string type;
  std::size_t size = 0;
};

std::size_t type_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "float" || type == "int32" || type == "uint32" ||
      type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  return 0;
}

double read_scalar(const char* p, const std::string& type) {
  if (type == "float" || type == "float32") {
    float v;
    std::memcpy(&v, p, 4);
    return v;
  }
  if (type == "double" || type == "float64") {
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }
  if (type == "uchar" || type == "uint8") return static_cast<unsigned char>(*p);
  fail(ErrorCode::kMalformed, "PLY: unsupported property type " + type);
}

}  // namespace

PointCloud parse_ply(const std::string& bytes) {
  const auto header_end = bytes.find("end_header\n");
  if (bytes.rfind("ply\n", 0) != 0 || header_end == std::string::npos) {
    fail(ErrorCode::kMalformed, "PLY: missing magic or end_header");
  }
  std::istringstream header(bytes.substr(0, header_end));
  std::string line;
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool seen_vertex = false;
  bool binary_le = false;
  std::vector<Property> props;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      if (seen_vertex && in_vertex) in_vertex = false;
      if (name == "vertex") {
        if (seen_vertex) fail(ErrorCode::kMalformed, "PLY: duplicate vertex element");
        in_vertex = seen_vertex = true;
        vertex_count = count;
      } else if (!seen_vertex) {
        fail(ErrorCode::kMalformed, "PLY: vertex element must come first");
      } else {
        in_vertex = false;
      }
    } else if (word == "property" && in_vertex) {
      Property p;
      ls >> p.type;
      if (p.type == "list") fail(ErrorCode::kMalformed, "PLY: list property on vertex");
      ls >> p.name;
      p.size = type_size(p.type);
      if (p.size == 0) fail(ErrorCode::kMalformed, "PLY: unknown property type " + p.type);
      props.push_back(p);
    }
  }
  if (!binary_le) fail(ErrorCode::kMalformed, "PLY: only binary_little_endian is supported");
  if (!seen_vertex) fail(ErrorCode::kMalformed, "PLY: no vertex element");

  std::size_t stride = 0;
  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < props.size(); ++i) {
    offsets.push_back(stride);
    stride += props[i].size;
    const auto& n = props[i].name;
    const int idx = static_cast<int>(i);
    if (n == "x") ix = idx;
    else if (n == "y") iy = idx;
    else if (n == "z") iz = idx;
    else if (n == "red") ir = idx;
    else if (n == "green") ig = idx;
    else if (n == "blue") ib = idx;
  }
  if (ix < 0 || iy < 0 || iz < 0) fail(ErrorCode::kMalformed, "PLY: missing x/y/z");
  const bool colored = ir >= 0 && ig >= 0 && ib >= 0;
  for (int c : {ir, ig, ib}) {
    if (c >= 0 && props[static_cast<std::size_t>(c)].size != 1) {
      fail(ErrorCode::kMalformed, "PLY: color channels must be uint8");
    }
  }

  const std::size_t body = header_end + std::strlen("end_header\n");
  if (bytes.size() < body + vertex_count * stride) fail(ErrorCode::kMalformed, "PLY: truncated body");

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  if (colored) cloud.colors.reserve(vertex_count);
  auto field = [&](const char* row, int i) {
    const auto u = static_cast<std::size_t>(i);
    return read_scalar(row + offsets[u], props[u].type);
  };
  for (std::size_t v = 0; v < vertex_count; ++v) {
    const char* row = bytes.data() + body + v * stride;
    cloud.points.emplace_back(field(row, ix), field(row, iy), field(row, iz));
    if (colored) {
      cloud.colors.emplace_back(field(row, ir) / 255.0, field(row, ig) / 255.0, field(row, ib) / 255.0);
    }
  }
  return cloud;
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ply(ss.str());
}

std::string serialize_ply(const PointCloud& cloud) {
  const bool colored = cloud.has_colors();
  if (colored) require(cloud.colors.size() == cloud.points.size(), "color count differs from point count");
  std::ostringstream out;
  out << "ply\nformat binary_little_endian 1.0\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (colored) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  std::string data = out.str();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const float f = static_cast<float>(cloud.points[i][a]);
      char buf[4];
      std::memcpy(buf, &f, 4);
      data.append(buf, 4);
    }
    if (colored) {
      for (int a = 0; a < 3; ++a) {
        const double c = std::clamp(cloud.colors[i][a], 0.0, 1.0);
        data.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
      }
    }
  }
  return data;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  const std::string data = serialize_ply(cloud);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace s2s
