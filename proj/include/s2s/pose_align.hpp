#pragma once

#include "s2s/geometry.hpp"

#include <array>
#include <cstddef>

namespace s2s {

inline constexpr int kYawSteps = 12;  // 30 degree grid
inline constexpr double kYawTieTolerance = 1e-6;
inline constexpr std::size_t kAlignPointBudget = 2048;

enum class AlignCost {
  kChamfer,    // normalized symmetric CD against the scan
  kBoxExtent,  // L1 difference of normalized box extents
};

struct AlignOptions {
  AlignCost cost = AlignCost::kChamfer;
  std::size_t point_budget = kAlignPointBudget;
  // Extra golden-section refinement around the best grid yaw (off by default).
  bool refine = false;
};

struct AlignmentResult {
  PoseTransform transform;
  std::array<double, kYawSteps> yaw_costs{};
  std::array<double, kYawSteps> yaw_scales{};
  int chosen_yaw_index = 0;
  double alignment_cost = 0.0;

  double yaw_degrees() const;
};

// Places asset onto scan: for every yaw on the 30 degree grid the asset is
// rotated, scaled so its longest box side equals the scan's, and translated so
// centroids coincide; the cheapest yaw wins, ties within 1e-6 going to the
// smaller angle. Throws kDegenerate for a zero-extent asset box.
AlignmentResult align_pose(const PointCloud& asset, const PointCloud& scan, const AlignOptions& opts = {});

// Normalized CD between the asset rotated by yaw about its centroid and the
// scan; the asset is expected to be centered and scaled already. Periodic in 2 pi.
double yaw_cost(const PointCloud& asset, const PointCloud& scan, double yaw);

// The transform align_pose would produce for a given yaw (rotation, then
// longest-side scale, then centroid translation).
PoseTransform placement_for_yaw(const PointCloud& asset, const PointCloud& scan, double yaw);

}  // namespace s2s
