#include "s2s/geometry.hpp"

#include "s2s/error.hpp"
#include "s2s/kdtree.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace s2s {

void validate_cloud(const PointCloud& cloud) {
  require(!cloud.points.empty(), "point cloud is empty");
  for (const auto& p : cloud.points) {
    require(p.allFinite(), "point cloud has non-finite coordinates");
  }
  if (cloud.has_colors()) {
    require(cloud.colors.size() == cloud.points.size(), "color count differs from point count");
    for (const auto& c : cloud.colors) {
      require(c.allFinite() && c.minCoeff() >= 0.0 && c.maxCoeff() <= 1.0,
              "color channel outside [0,1]");
    }
  }
}

Vec3 centroid(const PointCloud& cloud) {
  require(!cloud.empty(), "centroid of empty cloud");
  Vec3 sum = Vec3::Zero();
  for (const auto& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

double Aabb::volume() const {
  const Vec3 e = extent();
  return std::max(0.0, e.x()) * std::max(0.0, e.y()) * std::max(0.0, e.z());
}

bool Aabb::valid() const {
  return min.allFinite() && max.allFinite() && (min.array() <= max.array()).all();
}

Aabb Aabb::of(std::span<const Vec3> points) {
  require(!points.empty(), "bounding box of empty point set");
  Aabb box{points.front(), points.front()};
  for (const auto& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

Aabb Aabb::of(const PointCloud& cloud) { return of(std::span<const Vec3>(cloud.points)); }

Aabb merge(std::span<const Aabb> boxes) {
  require(!boxes.empty(), "merge of zero boxes");
  Aabb out = boxes.front();
  for (const auto& b : boxes) {
    out.min = out.min.cwiseMin(b.min);
    out.max = out.max.cwiseMax(b.max);
  }
  return out;
}

double intersection_volume(const Aabb& a, const Aabb& b) {
  double v = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double overlap = std::min(a.max[i], b.max[i]) - std::max(a.min[i], b.min[i]);
    if (overlap <= 0.0) return 0.0;
    v *= overlap;
  }
  return v;
}

double normalize_angle(double radians) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

PoseTransform PoseTransform::make(const Vec3& translation, double scale, double yaw) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    fail(ErrorCode::kInvalidArgument, "pose scale must be positive and finite");
  }
  if (!translation.allFinite() || !std::isfinite(yaw)) {
    fail(ErrorCode::kInvalidArgument, "pose has non-finite components");
  }
  return PoseTransform{translation, scale, normalize_angle(yaw)};
}

Vec3 PoseTransform::apply(const Vec3& p) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const Vec3 q = scale * p;
  return Vec3(c * q.x() - s * q.y(), s * q.x() + c * q.y(), q.z()) + translation;
}

Vec3 PoseTransform::apply_inverse(const Vec3& p) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const Vec3 q = p - translation;
  return Vec3(c * q.x() + s * q.y(), -s * q.x() + c * q.y(), q.z()) / scale;
}

PoseTransform PoseTransform::inverse() const {
  // p = R^-1 (x - t) / s  ==  R(-yaw)((1/s) x) + R(-yaw)(-t / s)
  PoseTransform inv{Vec3::Zero(), 1.0 / scale, normalize_angle(-yaw)};
  inv.translation = -inv.apply(translation);
  return inv;
}

namespace {

void check_transform(const PoseTransform& t) {
  if (!(t.scale > 0.0) || !std::isfinite(t.scale)) {
    fail(ErrorCode::kInvalidArgument, "pose scale must be positive and finite");
  }
}

}  // namespace

PointCloud apply_transform(const PointCloud& cloud, const PoseTransform& t) {
  check_transform(t);
  PointCloud out;
  out.colors = cloud.colors;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
  return out;
}

PointCloud apply_inverse_transform(const PointCloud& cloud, const PoseTransform& t) {
  check_transform(t);
  PointCloud out;
  out.colors = cloud.colors;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t.apply_inverse(p));
  return out;
}

Aabb transform_box(const Aabb& box, const PoseTransform& t) {
  check_transform(t);
  std::vector<Vec3> corners;
  corners.reserve(8);
  for (int i = 0; i < 8; ++i) {
    const Vec3 c((i & 1) ? box.max.x() : box.min.x(), (i & 2) ? box.max.y() : box.min.y(),
                 (i & 4) ? box.max.z() : box.min.z());
    corners.push_back(t.apply(c));
  }
  return Aabb::of(std::span<const Vec3>(corners));
}

double signed_area(std::span<const Vec2> polygon) {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % polygon.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

double FloorPolygon::area() const { return std::abs(signed_area(vertices)); }

bool FloorPolygon::contains(const Vec2& p, double tol) const {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  // Boundary counts as inside.
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    if ((a + t * ab - p).norm() <= tol) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

namespace {

std::vector<Vec2> footprint_corners(std::span<const Aabb> boxes) {
  std::vector<Vec2> corners;
  corners.reserve(4 * boxes.size());
  for (const auto& b : boxes) {
    corners.emplace_back(b.min.x(), b.min.y());
    corners.emplace_back(b.max.x(), b.min.y());
    corners.emplace_back(b.max.x(), b.max.y());
    corners.emplace_back(b.min.x(), b.max.y());
  }
  return corners;
}

// Outline of the union of axis-aligned footprints, holes filled. Works on the
// grid induced by all footprint edge coordinates.
std::vector<Vec2> footprint_union_outline(std::span<const Aabb> boxes) {
  std::vector<double> xs, ys;
  for (const auto& b : boxes) {
    xs.push_back(b.min.x());
    xs.push_back(b.max.x());
    ys.push_back(b.min.y());
    ys.push_back(b.max.y());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  if (xs.size() < 2 || ys.size() < 2) fail(ErrorCode::kDegenerate, "footprints have no area");

  // Cells padded by one ring so the flood fill can reach around the region.
  const int nx = static_cast<int>(xs.size()) - 1 + 2;
  const int ny = static_cast<int>(ys.size()) - 1 + 2;
  std::vector<char> covered(static_cast<std::size_t>(nx * ny), 0);
  auto at = [&](int i, int j) -> char& { return covered[static_cast<std::size_t>(j * nx + i)]; };
  for (const auto& b : boxes) {
    const auto x0 = std::lower_bound(xs.begin(), xs.end(), b.min.x()) - xs.begin();
    const auto x1 = std::lower_bound(xs.begin(), xs.end(), b.max.x()) - xs.begin();
    const auto y0 = std::lower_bound(ys.begin(), ys.end(), b.min.y()) - ys.begin();
    const auto y1 = std::lower_bound(ys.begin(), ys.end(), b.max.y()) - ys.begin();
    for (auto j = y0; j < y1; ++j)
      for (auto i = x0; i < x1; ++i) at(static_cast<int>(i) + 1, static_cast<int>(j) + 1) = 1;
  }

  // Outside flood fill; anything unreached and uncovered is a hole.
  std::vector<char> outside(covered.size(), 0);
  std::vector<std::pair<int, int>> stack{{0, 0}};
  outside[0] = 1;
  const int di[] = {1, -1, 0, 0};
  const int dj[] = {0, 0, 1, -1};
  while (!stack.empty()) {
    auto [i, j] = stack.back();
    stack.pop_back();
    for (int d = 0; d < 4; ++d) {
      const int a = i + di[d], b = j + dj[d];
      if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
      const auto idx = static_cast<std::size_t>(b * nx + a);
      if (outside[idx] || covered[idx]) continue;
      outside[idx] = 1;
      stack.emplace_back(a, b);
    }
  }
  std::size_t covered_count = 0;
  int si = -1, sj = -1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!outside[static_cast<std::size_t>(j * nx + i)]) {
        at(i, j) = 1;
        ++covered_count;
        if (si < 0) si = i, sj = j;
      }
    }
  }
  if (covered_count == 0) fail(ErrorCode::kDegenerate, "footprints have no area");

  // Region must be one 4-connected piece.
  std::vector<char> seen(covered.size(), 0);
  std::size_t reached = 1;
  stack.assign(1, {si, sj});
  seen[static_cast<std::size_t>(sj * nx + si)] = 1;
  while (!stack.empty()) {
    auto [i, j] = stack.back();
    stack.pop_back();
    for (int d = 0; d < 4; ++d) {
      const int a = i + di[d], b = j + dj[d];
      if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
      const auto idx = static_cast<std::size_t>(b * nx + a);
      if (seen[idx] || !covered[idx]) continue;
      seen[idx] = 1;
      ++reached;
      stack.emplace_back(a, b);
    }
  }
  if (reached != covered_count) {
    fail(ErrorCode::kDegenerate, "footprint union is disconnected; use the convex-hull mode");
  }

  // Directed boundary edges with the region on the left (counterclockwise).
  using Node = std::pair<int, int>;
  std::map<Node, std::vector<Node>> next;
  auto filled = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < nx && j < ny && covered[static_cast<std::size_t>(j * nx + i)];
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!filled(i, j)) continue;
      if (!filled(i, j - 1)) next[{i, j}].push_back({i + 1, j});
      if (!filled(i + 1, j)) next[{i + 1, j}].push_back({i + 1, j + 1});
      if (!filled(i, j + 1)) next[{i + 1, j + 1}].push_back({i, j + 1});
      if (!filled(i - 1, j)) next[{i, j + 1}].push_back({i, j});
    }
  }
  for (const auto& [node, outs] : next) {
    if (outs.size() != 1) fail(ErrorCode::kDegenerate, "footprint union is not a simple polygon");
  }

  const Node start = next.begin()->first;
  std::vector<Node> loop{start};
  Node cur = next[start].front();
  while (cur != start) {
    loop.push_back(cur);
    cur = next[cur].front();
    if (loop.size() > next.size()) fail(ErrorCode::kDegenerate, "footprint outline did not close");
  }
  if (loop.size() != next.size()) {
    fail(ErrorCode::kDegenerate, "footprint union is not a simple polygon");
  }

  auto to_point = [&](const Node& n) {
    return Vec2(xs[static_cast<std::size_t>(n.first - 1)], ys[static_cast<std::size_t>(n.second - 1)]);
  };
  std::vector<Vec2> out;
  const std::size_t n = loop.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Node& prev = loop[(k + n - 1) % n];
    const Node& here = loop[k];
    const Node& after = loop[(k + 1) % n];
    const bool straight = (prev.first == here.first && here.first == after.first) ||
                          (prev.second == here.second && here.second == after.second);
    if (!straight) out.push_back(to_point(here));
  }
  return out;
}

}  // namespace

FloorPolygon estimate_floor_plan(std::span<const Aabb> boxes, FloorPlanMode mode) {
  require(!boxes.empty(), "floor plan needs at least one box");
  for (const auto& b : boxes) require(b.valid(), "floor plan input box is invalid");

  FloorPolygon poly;
  if (mode == FloorPlanMode::kConvexHull) {
    poly.vertices = convex_hull(footprint_corners(boxes));
  } else {
    poly.vertices = footprint_union_outline(boxes);
  }
  if (poly.vertices.size() < 3 || !(poly.area() > 0.0)) {
    fail(ErrorCode::kDegenerate, "degenerate floor hull: footprints are collinear or empty");
  }
  if (signed_area(poly.vertices) < 0) std::reverse(poly.vertices.begin(), poly.vertices.end());
  return poly;
}

std::vector<double> nearest_distance(std::span<const Vec3> query, std::span<const Vec3> target) {
  require(!query.empty() && !target.empty(), "nearest_distance: empty cloud");
  std::vector<double> out(query.size());
  // Small targets are cheaper to scan directly; both paths are exact.
  if (target.size() <= 64) {
    for (std::size_t i = 0; i < query.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& t : target) best = std::min(best, (query[i] - t).squaredNorm());
      out[i] = std::sqrt(best);
    }
    return out;
  }
  const KdTree tree(target);
  for (std::size_t i = 0; i < query.size(); ++i) {
    out[i] = std::sqrt(tree.nearest(query[i]).squared_distance);
  }
  return out;
}

std::vector<double> nearest_distance(const PointCloud& query, const PointCloud& target) {
  return nearest_distance(std::span<const Vec3>(query.points), std::span<const Vec3>(target.points));
}

std::vector<double> estimate_curvature(const PointCloud& cloud, std::size_t k) {
  require(k >= 3, "curvature needs k >= 3");
  require(cloud.size() >= k + 1, "curvature needs at least k+1 points");
  const KdTree tree(cloud.points);
  std::vector<double> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto hits = tree.k_nearest(cloud.points[i], k + 1);
    Vec3 mean = Vec3::Zero();
    for (const auto& h : hits) mean += cloud.points[h.index];
    mean /= static_cast<double>(hits.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& h : hits) {
      const Vec3 d = cloud.points[h.index] - mean;
      cov += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov, Eigen::EigenvaluesOnly);
    const Vec3 ev = solver.eigenvalues().cwiseMax(0.0);
    const double total = ev.sum();
    out[i] = total > 0.0 ? std::clamp(ev.minCoeff() / total, 0.0, 1.0 / 3.0) : 0.0;
  }
  return out;
}

PointCloud farthest_point_sample(const PointCloud& cloud, std::size_t budget) {
  require(budget >= 1, "farthest_point_sample: zero budget");
  if (cloud.size() <= budget) return cloud;
  std::vector<double> dist(cloud.size(), std::numeric_limits<double>::infinity());
  std::vector<std::size_t> picked;
  picked.reserve(budget);
  std::size_t current = 0;
  for (std::size_t n = 0; n < budget; ++n) {
    picked.push_back(current);
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const double d = (cloud.points[i] - cloud.points[current]).squaredNorm();
      if (d < dist[i]) dist[i] = d;
      if (dist[i] > best_d) best_d = dist[i], best = i;
    }
    current = best;
  }
  std::sort(picked.begin(), picked.end());
  PointCloud out;
  out.points.reserve(budget);
  for (auto i : picked) {
    out.points.push_back(cloud.points[i]);
    if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
  }
  return out;
}

}  // namespace s2s
