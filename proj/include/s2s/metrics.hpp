#pragma once

#include "s2s/geometry.hpp"
#include "s2s/scene.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace s2s {

// Clouds are compared in a frame centered on the scan's centroid and scaled
// so the scan's bounding-box diagonal is 1.
struct NormalizationFrame {
  Vec3 origin = Vec3::Zero();
  double inv_scale = 1.0;

  static NormalizationFrame from_scan(const PointCloud& scan);
  PointCloud apply(const PointCloud& cloud) const;
};

inline constexpr std::size_t kMetricPointBudget = 4096;

// 0.5 * (mean NN distance a->b + mean NN distance b->a), in the input frame.
double chamfer_distance(const PointCloud& a, const PointCloud& b);

struct EcdOptions {
  std::size_t curvature_k = 16;
  bool curvature_weighting = true;
};

// Chamfer distance with every per-point distance weighted by
// 1 + kappa / kappa_max of the point's own cloud. Clouds too small for the
// curvature neighbourhood fall back to k = n - 1, and to unit weights below 4 points.
double enhanced_chamfer_distance(const PointCloud& a, const PointCloud& b, const EcdOptions& opts = {});

// CD / ECD after downsampling both clouds to the point budget and mapping
// them into the scan's normalization frame.
double normalized_chamfer_distance(const PointCloud& asset, const PointCloud& scan,
                                   std::size_t budget = kMetricPointBudget);
double normalized_enhanced_chamfer_distance(const PointCloud& asset, const PointCloud& scan,
                                            std::size_t budget = kMetricPointBudget);

// Throws kDegenerate when the union has zero volume.
double bbox_iou(const Aabb& a, const Aabb& b);

// KL(P || Q) between two count vectors of equal length. With smoothing, one is
// added to every bin of both before normalizing. Returns +inf when P has mass
// where Q has none.
double kl_divergence(std::span<const double> p_counts, std::span<const double> q_counts,
                     bool add_one_smoothing = true);

// Joint bins x bins x bins RGB histogram, flattened r-major.
std::vector<double> color_histogram(const PointCloud& cloud, int bins = 8);
double color_histogram_kl(const PointCloud& a, const PointCloud& b, int bins = 8,
                          bool add_one_smoothing = true);

double size_error(const Aabb& aligned, const Aabb& real);
double scale_error(std::span<const Aabb> scene_a, std::span<const Aabb> scene_b);

// Fraction of rankings whose truth id is among the first k entries.
double topk_accuracy(const std::vector<std::vector<std::string>>& rankings,
                     const std::vector<std::string>& truths, std::size_t k);

using CategoryHistogram = std::map<std::string, double>;
double category_kl(const CategoryHistogram& generated, const CategoryHistogram& reference,
                   bool add_one_smoothing = true);

struct CollisionRates {
  double col_obj = 0.0;
  double col_scene = 0.0;
};

inline constexpr double kCollisionIouThreshold = 1e-6;

CollisionRates collision_rates(std::span<const Aabb> boxes, double iou_threshold = kCollisionIouThreshold);
CollisionRates collision_rates(const SceneLayout& scene, double iou_threshold = kCollisionIouThreshold);

// Fraction of small objects whose footprint centroid lies outside the large
// object's top surface; the boundary counts as inside.
double out_of_plane_rate(const MicroScene& micro);

struct ObjectMetrics {
  double cd = 0.0;
  double ecd = 0.0;
  double iou = 0.0;
  std::optional<double> color_hist_kl;
  double size_err_m3 = 0.0;
};

struct SceneMetrics {
  std::optional<double> scale_err_m;
  std::optional<double> top1;
  std::optional<double> top5;
  double col_obj = 0.0;
  double col_scene = 0.0;
  std::optional<double> r_out;
  std::optional<double> ckl;
};

struct MetricsReport {
  std::map<std::string, ObjectMetrics> per_object;  // sorted by id
  SceneMetrics per_scene;
  std::vector<std::string> failures;  // objects skipped, "id: reason"

  std::string to_json() const;
  std::string to_csv() const;
};

}  // namespace s2s
