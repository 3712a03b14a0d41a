#include "s2s/pose_align.hpp"

#include "s2s/error.hpp"
#include "s2s/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace s2s {
namespace {

constexpr double kYawStep = 2.0 * std::numbers::pi / kYawSteps;

double grid_yaw(int k) { return kYawStep * k; }

Aabb rotated_box(const PointCloud& cloud, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Aabb box{Vec3::Constant(std::numeric_limits<double>::infinity()),
           Vec3::Constant(-std::numeric_limits<double>::infinity())};
  for (const auto& p : cloud.points) {
    const Vec3 q(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z());
    box.min = box.min.cwiseMin(q);
    box.max = box.max.cwiseMax(q);
  }
  return box;
}

// Clouds prepared once per alignment: downsampled copies plus the scan frame.
struct Prepared {
  PointCloud asset_sample;
  PointCloud scan_sample_normalized;
  NormalizationFrame frame;
  Vec3 asset_centroid;
  Vec3 scan_centroid;
  Aabb scan_box;
};

Prepared prepare(const PointCloud& asset, const PointCloud& scan, std::size_t budget) {
  Prepared p;
  p.frame = NormalizationFrame::from_scan(scan);
  p.asset_sample = farthest_point_sample(asset, budget);
  p.scan_sample_normalized = p.frame.apply(farthest_point_sample(scan, budget));
  p.asset_centroid = centroid(asset);
  p.scan_centroid = centroid(scan);
  p.scan_box = Aabb::of(scan);
  return p;
}

PoseTransform placement(const PointCloud& asset, const Prepared& p, double yaw) {
  const double asset_side = rotated_box(asset, yaw).longest_side();
  if (!(asset_side > 0.0)) fail(ErrorCode::kDegenerate, "asset bounding box has zero extent");
  const double scale = p.scan_box.longest_side() / asset_side;
  if (!(scale > 0.0)) fail(ErrorCode::kDegenerate, "scan bounding box has zero extent");
  PoseTransform t{Vec3::Zero(), scale, normalize_angle(yaw)};
  t.translation = p.scan_centroid - t.apply(p.asset_centroid);
  return t;
}

double cost_of(const PoseTransform& t, const Prepared& p, const PointCloud& asset, AlignCost mode) {
  if (mode == AlignCost::kChamfer) {
    return chamfer_distance(p.frame.apply(apply_transform(p.asset_sample, t)), p.scan_sample_normalized);
  }
  const Vec3 asset_extent = rotated_box(asset, t.yaw).extent() * t.scale;
  const Vec3 diff = (asset_extent - p.scan_box.extent()) * p.frame.inv_scale;
  return diff.cwiseAbs().sum();
}

}  // namespace

double AlignmentResult::yaw_degrees() const { return transform.yaw * 180.0 / std::numbers::pi; }

PoseTransform placement_for_yaw(const PointCloud& asset, const PointCloud& scan, double yaw) {
  validate_cloud(asset);
  validate_cloud(scan);
  Prepared p;
  p.asset_centroid = centroid(asset);
  p.scan_centroid = centroid(scan);
  p.scan_box = Aabb::of(scan);
  return placement(asset, p, yaw);
}

double yaw_cost(const PointCloud& asset, const PointCloud& scan, double yaw) {
  validate_cloud(asset);
  validate_cloud(scan);
  const Prepared p = prepare(asset, scan, kAlignPointBudget);
  PoseTransform t{Vec3::Zero(), 1.0, normalize_angle(yaw)};
  t.translation = p.scan_centroid - t.apply(p.asset_centroid);
  return chamfer_distance(p.frame.apply(apply_transform(p.asset_sample, t)), p.scan_sample_normalized);
}

AlignmentResult align_pose(const PointCloud& asset, const PointCloud& scan, const AlignOptions& opts) {
  validate_cloud(asset);
  validate_cloud(scan);
  if (!(Aabb::of(asset).longest_side() > 0.0)) fail(ErrorCode::kDegenerate, "asset bounding box has zero extent");
  if (!(Aabb::of(scan).longest_side() > 0.0)) fail(ErrorCode::kDegenerate, "scan bounding box has zero extent");
  const Prepared p = prepare(asset, scan, std::max<std::size_t>(1, opts.point_budget));

  AlignmentResult r;
  std::array<PoseTransform, kYawSteps> poses;
  for (int k = 0; k < kYawSteps; ++k) {
    poses[static_cast<std::size_t>(k)] = placement(asset, p, grid_yaw(k));
    r.yaw_scales[static_cast<std::size_t>(k)] = poses[static_cast<std::size_t>(k)].scale;
    r.yaw_costs[static_cast<std::size_t>(k)] = cost_of(poses[static_cast<std::size_t>(k)], p, asset, opts.cost);
  }
  const double best = *std::min_element(r.yaw_costs.begin(), r.yaw_costs.end());
  for (int k = 0; k < kYawSteps; ++k) {
    if (r.yaw_costs[static_cast<std::size_t>(k)] <= best + kYawTieTolerance) {
      r.chosen_yaw_index = k;
      break;
    }
  }
  r.alignment_cost = best;
  r.transform = poses[static_cast<std::size_t>(r.chosen_yaw_index)];

  if (opts.refine) {
    // Golden-section search within half a grid step of the chosen yaw.
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = grid_yaw(r.chosen_yaw_index) - kYawStep / 2;
    double hi = grid_yaw(r.chosen_yaw_index) + kYawStep / 2;
    auto f = [&](double yaw) { return cost_of(placement(asset, p, yaw), p, asset, opts.cost); };
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 40; ++it) {
      if (f1 < f2) {
        hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = f(x1);
      } else {
        lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = f(x2);
      }
    }
    const double yaw = f1 < f2 ? x1 : x2;
    const double refined = std::min(f1, f2);
    if (refined < r.yaw_costs[static_cast<std::size_t>(r.chosen_yaw_index)]) {
      r.transform = placement(asset, p, yaw);
      r.alignment_cost = std::min(best, refined);
    }
  }
  return r;
}

}  // namespace s2s
