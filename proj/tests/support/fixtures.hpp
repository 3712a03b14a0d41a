#pragma once

#include "oracles.hpp"

#include "s2s/geometry.hpp"
#include "s2s/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace fixtures {

inline std::vector<oracle::P3> to_array(const s2s::PointCloud& c) {
  std::vector<oracle::P3> out;
  for (const auto& p : c.points) out.push_back({p.x(), p.y(), p.z()});
  return out;
}

inline oracle::Box to_box(const s2s::Aabb& b) {
  return {{b.min.x(), b.min.y(), b.min.z()}, {b.max.x(), b.max.y(), b.max.z()}};
}

inline s2s::PointCloud random_cloud(std::mt19937_64& gen, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  s2s::PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.emplace_back(u(gen), u(gen), u(gen));
  return c;
}

inline s2s::PointCloud random_colored_cloud(std::mt19937_64& gen, std::size_t n) {
  auto c = random_cloud(gen, n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) c.colors.emplace_back(u(gen), u(gen), u(gen));
  return c;
}

inline s2s::Aabb random_box(std::mt19937_64& gen, double span = 3.0, double min_size = 0.1, double max_size = 1.0) {
  std::uniform_real_distribution<double> pos(0.0, span);
  std::uniform_real_distribution<double> size(min_size, max_size);
  const s2s::Vec3 lo(pos(gen), pos(gen), pos(gen));
  return s2s::Aabb{lo, lo + s2s::Vec3(size(gen), size(gen), size(gen))};
}

inline s2s::Aabb box(double x0, double y0, double z0, double x1, double y1, double z1) {
  return s2s::Aabb{s2s::Vec3(x0, y0, z0), s2s::Vec3(x1, y1, z1)};
}

inline s2s::PointCloud plane_cloud(std::size_t n, std::uint64_t seed = 1) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  s2s::PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.emplace_back(u(gen), u(gen), 0.0);
  return c;
}

inline s2s::PointCloud sphere_cloud(std::size_t n, std::uint64_t seed = 2) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  s2s::PointCloud c;
  while (c.points.size() < n) {
    s2s::Vec3 v(g(gen), g(gen), g(gen));
    if (v.norm() < 1e-9) continue;
    c.points.push_back(v.normalized());
  }
  return c;
}

// An L-shaped, height-varying cloud with no rotational symmetry about z.
inline s2s::PointCloud asymmetric_asset(std::size_t n, std::uint64_t seed = 7) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  s2s::PointCloud c;
  while (c.points.size() < n) {
    const double x = 2.0 * u(gen), y = 1.2 * u(gen), z = 0.8 * u(gen);
    if (x > 0.7 && y > 0.5) continue;  // notch
    c.points.emplace_back(x + 0.3, y - 0.2, z + 0.25 * x);
  }
  return c;
}

// Points on a vertical cylinder at angles that are multiples of 1 degree, so a
// 30 degree rotation maps the cloud onto itself.
inline s2s::PointCloud cylinder_cloud() {
  s2s::PointCloud c;
  for (int h = 0; h < 5; ++h) {
    for (int a = 0; a < 360; a += 3) {
      const double t = a * std::numbers::pi / 180.0;
      c.points.emplace_back(std::cos(t), std::sin(t), 0.2 * h);
    }
  }
  return c;
}

inline s2s::SceneObject object(const std::string& id, const s2s::Aabb& b, const std::string& category = "object") {
  s2s::SceneObject o;
  o.id = id;
  o.category = category;
  o.box = b;
  return o;
}

inline s2s::FloorPolygon square_floor(double lo, double hi) {
  return s2s::FloorPolygon{{s2s::Vec2(lo, lo), s2s::Vec2(hi, lo), s2s::Vec2(hi, hi), s2s::Vec2(lo, hi)}};
}

}  // namespace fixtures
