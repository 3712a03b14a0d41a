#pragma once

// Point clouds, boxes, transforms and the floor-plan heuristic. Up axis is +z
// throughout; data in another convention must be rotated at ingestion.

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace s2s {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

struct PointCloud {
  std::vector<Vec3> points;
  // Empty, or one (r,g,b) in [0,1] per point.
  std::vector<Vec3> colors;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
};

// Throws kPrecondition on empty clouds, non-finite coordinates, or bad colors.
void validate_cloud(const PointCloud& cloud);

Vec3 centroid(const PointCloud& cloud);

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double volume() const;
  double diagonal() const { return extent().norm(); }
  double longest_side() const { return extent().maxCoeff(); }
  bool valid() const;

  static Aabb of(const PointCloud& cloud);
  static Aabb of(std::span<const Vec3> points);
};

// Union box of a non-empty list of boxes.
Aabb merge(std::span<const Aabb> boxes);

// Volume of the overlap region, 0 when disjoint or touching.
double intersection_volume(const Aabb& a, const Aabb& b);

// Places an asset: p -> R_yaw(scale * p) + translation.
struct PoseTransform {
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  double yaw = 0.0;  // radians, [0, 2pi)

  static PoseTransform make(const Vec3& translation, double scale, double yaw);

  Vec3 apply(const Vec3& p) const;
  Vec3 apply_inverse(const Vec3& p) const;
  PoseTransform inverse() const;
};

double normalize_angle(double radians);

PointCloud apply_transform(const PointCloud& cloud, const PoseTransform& t);
PointCloud apply_inverse_transform(const PointCloud& cloud, const PoseTransform& t);

// Box of the transformed corners (exact for yaw multiples of 90 degrees,
// conservative otherwise).
Aabb transform_box(const Aabb& box, const PoseTransform& t);

struct FloorPolygon {
  std::vector<Vec2> vertices;  // counterclockwise

  double area() const;
  // Inclusive of edges and vertices.
  bool contains(const Vec2& p, double tol = 1e-9) const;
};

double signed_area(std::span<const Vec2> polygon);

// Andrew's monotone chain; counterclockwise, collinear points dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

enum class FloorPlanMode { kConvexHull, kFootprintUnion };

// Region covering every box footprint projected to z = 0. Throws kPrecondition
// for no boxes and kDegenerate when the covering region has no area.
FloorPolygon estimate_floor_plan(std::span<const Aabb> boxes,
                                 FloorPlanMode mode = FloorPlanMode::kConvexHull);

// Exact nearest-neighbour distance from every query point to the target cloud.
std::vector<double> nearest_distance(const PointCloud& query, const PointCloud& target);
std::vector<double> nearest_distance(std::span<const Vec3> query, std::span<const Vec3> target);

// Surface variation lambda_min / (l1 + l2 + l3) of the k-NN covariance
// (neighbourhood includes the point itself). Values lie in [0, 1/3].
std::vector<double> estimate_curvature(const PointCloud& cloud, std::size_t k = 16);

// Deterministic farthest-point sampling seeded at index 0. Returns the cloud
// unchanged when it already fits the budget.
PointCloud farthest_point_sample(const PointCloud& cloud, std::size_t budget);

}  // namespace s2s
