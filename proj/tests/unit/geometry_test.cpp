#include "s2s/geometry.hpp"

#include "s2s/error.hpp"
#include "s2s/kdtree.hpp"
#include "s2s/ply.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace s2s {
namespace {

PointCloud cloud_of(std::initializer_list<Vec3> pts) {
  PointCloud c;
  c.points.assign(pts.begin(), pts.end());
  return c;
}

TEST(NearestDistance, IdenticalPoint) {
  const auto d = nearest_distance(cloud_of({Vec3(0, 0, 0)}), cloud_of({Vec3(0, 0, 0)}));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0], 0.0);
}

TEST(NearestDistance, NearestOfTwo) {
  const auto d = nearest_distance(cloud_of({Vec3(0, 0, 0)}), cloud_of({Vec3(1, 0, 0), Vec3(3, 0, 0)}));
  EXPECT_EQ(d[0], 1.0);
}

TEST(NearestDistance, EmptyCloudIsPreconditionError) {
  try {
    nearest_distance(PointCloud{}, cloud_of({Vec3(0, 0, 0)}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

TEST(NearestDistance, MatchesBruteForceOnRandomClouds) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t nq = 1 + gen() % 500, nt = 1 + gen() % 500;
    const auto q = fixtures::random_cloud(gen, nq);
    const auto t = fixtures::random_cloud(gen, nt);
    const auto got = nearest_distance(q, t);
    const auto want = oracle::nearest(fixtures::to_array(q), fixtures::to_array(t));
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], want[i]) << "trial " << trial << " point " << i;
  }
}

TEST(KdTree, ExactOnLargeCloudsWithDuplicates) {
  std::mt19937_64 gen(12);
  auto t = fixtures::random_cloud(gen, 3000);
  // Duplicated and grid-aligned points stress the split handling.
  for (int i = 0; i < 200; ++i) t.points.push_back(t.points[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 100; ++i) t.points.emplace_back(0.0, 0.0, 0.01 * i);
  const auto q = fixtures::random_cloud(gen, 300);
  const auto got = nearest_distance(q, t);
  const auto want = oracle::nearest(fixtures::to_array(q), fixtures::to_array(t));
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], want[i]);
}

TEST(KdTree, KNearestSortedAndComplete) {
  std::mt19937_64 gen(13);
  const auto c = fixtures::random_cloud(gen, 400);
  const KdTree tree(c.points);
  const Vec3 q(0.1, -0.2, 0.3);
  const auto hits = tree.k_nearest(q, 16);
  ASSERT_EQ(hits.size(), 16u);
  std::vector<double> all;
  for (const auto& p : c.points) all.push_back((p - q).squaredNorm());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < hits.size(); ++i) EXPECT_EQ(hits[i].squared_distance, all[i]);
}

TEST(Curvature, PlanarSamplesAreFlat) {
  const auto c = fixtures::plane_cloud(200);
  for (double k : estimate_curvature(c, 16)) EXPECT_LT(k, 1e-6);
}

TEST(Curvature, SphereExceedsPlaneEverywhere) {
  const auto plane = estimate_curvature(fixtures::plane_cloud(200), 16);
  const double plane_max = *std::max_element(plane.begin(), plane.end());
  for (double k : estimate_curvature(fixtures::sphere_cloud(200), 16)) {
    EXPECT_GT(k, plane_max);
    EXPECT_LE(k, 1.0 / 3.0);
  }
}

TEST(Curvature, MinimumNeighbourhoodOnCoplanarPoints) {
  const auto c = cloud_of({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)});
  for (double k : estimate_curvature(c, 3)) EXPECT_EQ(k, 0.0);
}

TEST(Curvature, TooFewPoints) {
  const auto c = cloud_of({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)});
  EXPECT_THROW(estimate_curvature(c, 3), Error);
  EXPECT_THROW(estimate_curvature(fixtures::plane_cloud(10), 2), Error);
}

TEST(Curvature, BoundedOnRandomClouds) {
  std::mt19937_64 gen(14);
  for (int t = 0; t < 5; ++t) {
    for (double k : estimate_curvature(fixtures::random_cloud(gen, 150), 16)) {
      EXPECT_GE(k, 0.0);
      EXPECT_LE(k, 1.0 / 3.0);
    }
  }
}

double shoelace(const std::vector<Vec2>& v) {
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * s;
}

TEST(FloorPlan, SingleFootprint) {
  const std::vector<Aabb> boxes{fixtures::box(0, 0, 0, 1, 1, 1)};
  const auto poly = estimate_floor_plan(boxes);
  EXPECT_EQ(poly.vertices.size(), 4u);
  EXPECT_DOUBLE_EQ(poly.area(), 1.0);
}

TEST(FloorPlan, AdjacentFootprintsFormRectangle) {
  const std::vector<Aabb> boxes{fixtures::box(0, 0, 0, 1, 1, 1), fixtures::box(1, 0, 0, 2, 1, 1)};
  const auto poly = estimate_floor_plan(boxes);
  EXPECT_EQ(poly.vertices.size(), 4u);
  EXPECT_DOUBLE_EQ(poly.area(), 2.0);
}

TEST(FloorPlan, DiagonalFootprintsHullArea) {
  const std::vector<Aabb> boxes{fixtures::box(0, 0, 0, 1, 1, 1), fixtures::box(2, 2, 0, 3, 3, 1)};
  const auto poly = estimate_floor_plan(boxes);
  // Oracle: shoelace over the hand-derived hull vertex list.
  const double expected = shoelace({Vec2(0, 0), Vec2(1, 0), Vec2(3, 2), Vec2(3, 3), Vec2(2, 3), Vec2(0, 1)});
  EXPECT_DOUBLE_EQ(expected, 5.0);
  EXPECT_DOUBLE_EQ(poly.area(), expected);
  EXPECT_GT(signed_area(poly.vertices), 0.0);
}

TEST(FloorPlan, Errors) {
  try {
    estimate_floor_plan(std::vector<Aabb>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
  // Zero-depth footprints along one line.
  const std::vector<Aabb> line{fixtures::box(0, 0, 0, 1, 0, 1), fixtures::box(2, 0, 0, 3, 0, 1)};
  try {
    estimate_floor_plan(line);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

TEST(FloorPlan, ContainsEveryFootprintCorner) {
  std::mt19937_64 gen(15);
  for (int t = 0; t < 50; ++t) {
    std::vector<Aabb> boxes;
    for (int i = 0; i < 1 + static_cast<int>(gen() % 12); ++i) boxes.push_back(fixtures::random_box(gen, 5.0));
    const auto poly = estimate_floor_plan(boxes);
    for (const auto& b : boxes) {
      for (const Vec2& c : {Vec2(b.min.x(), b.min.y()), Vec2(b.max.x(), b.min.y()), Vec2(b.max.x(), b.max.y()),
                            Vec2(b.min.x(), b.max.y())}) {
        EXPECT_TRUE(poly.contains(c));
      }
    }
  }
}

TEST(FloorPlan, FootprintUnionFollowsConcaveRoom) {
  // L-shaped room: the union outline has six corners and area 3.
  const std::vector<Aabb> boxes{fixtures::box(0, 0, 0, 2, 1, 1), fixtures::box(0, 1, 0, 1, 2, 1)};
  const auto hull = estimate_floor_plan(boxes, FloorPlanMode::kConvexHull);
  const auto uni = estimate_floor_plan(boxes, FloorPlanMode::kFootprintUnion);
  EXPECT_DOUBLE_EQ(hull.area(), 3.5);
  EXPECT_DOUBLE_EQ(uni.area(), 3.0);
  EXPECT_EQ(uni.vertices.size(), 6u);
  EXPECT_GT(signed_area(uni.vertices), 0.0);
  EXPECT_FALSE(uni.contains(Vec2(1.5, 1.5)));
}

TEST(FloorPlan, FootprintUnionRejectsDisconnected) {
  const std::vector<Aabb> boxes{fixtures::box(0, 0, 0, 1, 1, 1), fixtures::box(2, 2, 0, 3, 3, 1)};
  EXPECT_THROW(estimate_floor_plan(boxes, FloorPlanMode::kFootprintUnion), Error);
}

TEST(FloorPolygon, BoundaryIsInside) {
  const auto sq = fixtures::square_floor(0, 1);
  EXPECT_TRUE(sq.contains(Vec2(1.0, 0.5)));
  EXPECT_TRUE(sq.contains(Vec2(0.0, 0.0)));
  EXPECT_TRUE(sq.contains(Vec2(0.5, 0.5)));
  EXPECT_FALSE(sq.contains(Vec2(1.0 + 1e-6, 0.5)));
}

TEST(Transform, Identity) {
  std::mt19937_64 gen(16);
  const auto c = fixtures::random_cloud(gen, 50);
  const auto out = apply_transform(c, PoseTransform{});
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(out.points[i], c.points[i]);
}

TEST(Transform, HalfTurn) {
  const auto out = apply_transform(cloud_of({Vec3(1, 0, 0)}), PoseTransform::make(Vec3::Zero(), 1.0, std::numbers::pi));
  EXPECT_NEAR(out.points[0].x(), -1.0, 1e-15);
  EXPECT_NEAR(out.points[0].y(), 0.0, 1e-15);
}

TEST(Transform, ScaleThenRotateThenTranslate) {
  const auto out = apply_transform(cloud_of({Vec3(1, 1, 0)}), PoseTransform::make(Vec3(1, 0, 0), 2.0, 0.0));
  EXPECT_EQ(out.points[0], Vec3(3, 2, 0));
}

TEST(Transform, RejectsNonPositiveScale) {
  EXPECT_THROW(PoseTransform::make(Vec3::Zero(), 0.0, 0.0), Error);
  EXPECT_THROW(apply_transform(cloud_of({Vec3(0, 0, 0)}), PoseTransform{Vec3::Zero(), -1.0, 0.0}), Error);
}

TEST(Transform, YawNormalized) {
  EXPECT_NEAR(PoseTransform::make(Vec3::Zero(), 1.0, -std::numbers::pi / 2).yaw, 1.5 * std::numbers::pi, 1e-15);
  EXPECT_EQ(PoseTransform::make(Vec3::Zero(), 1.0, 2 * std::numbers::pi).yaw, 0.0);
}

TEST(Transform, InverseRoundTrip) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-5, 5), s(0.1, 10), a(-10, 10);
  for (int t = 0; t < 100; ++t) {
    const auto pose = PoseTransform::make(Vec3(u(gen), u(gen), u(gen)), s(gen), a(gen));
    const auto c = fixtures::random_cloud(gen, 20, -3, 3);
    const auto back = apply_inverse_transform(apply_transform(c, pose), pose);
    const auto back2 = apply_transform(apply_transform(c, pose), pose.inverse());
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_LT((back.points[i] - c.points[i]).norm(), 1e-6);
      EXPECT_LT((back2.points[i] - c.points[i]).norm(), 1e-6);
    }
  }
}

TEST(FarthestPointSample, RespectsBudgetAndKeepsExtremes) {
  std::mt19937_64 gen(18);
  auto c = fixtures::random_cloud(gen, 1000);
  const auto s = farthest_point_sample(c, 64);
  EXPECT_EQ(s.size(), 64u);
  EXPECT_EQ(farthest_point_sample(c, 2000).size(), 1000u);
  EXPECT_EQ(farthest_point_sample(c, 64).points, s.points);
}

TEST(Ply, RoundTripWithColors) {
  std::mt19937_64 gen(19);
  auto c = fixtures::random_colored_cloud(gen, 100);
  const auto path = std::filesystem::temp_directory_path() / "s2s_geometry_test.ply";
  write_ply(path, c);
  const auto back = read_ply(path);
  ASSERT_EQ(back.size(), c.size());
  ASSERT_TRUE(back.has_colors());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_LT((back.points[i] - c.points[i]).norm(), 1e-6);
    EXPECT_LE((back.colors[i] - c.colors[i]).cwiseAbs().maxCoeff(), 0.5 / 255.0 + 1e-12);
  }
  std::filesystem::remove(path);
}

TEST(Ply, RejectsAscii) {
  EXPECT_THROW(parse_ply("ply\nformat ascii 1.0\nelement vertex 0\nend_header\n"), Error);
  EXPECT_THROW(read_ply("/nonexistent/file.ply"), Error);
}

TEST(Cloud, ValidateRejectsBadColors) {
  PointCloud c = cloud_of({Vec3(0, 0, 0)});
  c.colors.emplace_back(1.5, 0, 0);
  EXPECT_THROW(validate_cloud(c), Error);
  c.points[0] = Vec3(std::nan(""), 0, 0);
  EXPECT_THROW(validate_cloud(c), Error);
}

}  // namespace
}  // namespace s2s
