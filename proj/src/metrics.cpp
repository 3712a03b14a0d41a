#include "s2s/metrics.hpp"

#include "s2s/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace s2s {

NormalizationFrame NormalizationFrame::from_scan(const PointCloud& scan) {
  validate_cloud(scan);
  const double diag = Aabb::of(scan).diagonal();
  return NormalizationFrame{centroid(scan), diag > 0.0 ? 1.0 / diag : 1.0};
}

PointCloud NormalizationFrame::apply(const PointCloud& cloud) const {
  PointCloud out;
  out.colors = cloud.colors;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back((p - origin) * inv_scale);
  return out;
}

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double weighted_mean(const std::vector<double>& d, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * w[i];
  return s / static_cast<double>(d.size());
}

std::vector<double> curvature_weights(const PointCloud& cloud, const EcdOptions& opts) {
  std::vector<double> w(cloud.size(), 1.0);
  if (!opts.curvature_weighting || cloud.size() < 4) return w;
  const std::size_t k = std::min(opts.curvature_k, cloud.size() - 1);
  const auto kappa = estimate_curvature(cloud, k);
  const double kmax = *std::max_element(kappa.begin(), kappa.end());
  if (kmax <= 0.0) return w;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 + kappa[i] / kmax;
  return w;
}

void require_pair(const PointCloud& a, const PointCloud& b) {
  require(!a.empty() && !b.empty(), "chamfer distance of an empty cloud");
}

}  // namespace

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  require_pair(a, b);
  return 0.5 * (mean(nearest_distance(a, b)) + mean(nearest_distance(b, a)));
}

double enhanced_chamfer_distance(const PointCloud& a, const PointCloud& b, const EcdOptions& opts) {
  require_pair(a, b);
  const auto wa = curvature_weights(a, opts);
  const auto wb = curvature_weights(b, opts);
  return 0.5 * (weighted_mean(nearest_distance(a, b), wa) + weighted_mean(nearest_distance(b, a), wb));
}

double normalized_chamfer_distance(const PointCloud& asset, const PointCloud& scan, std::size_t budget) {
  require_pair(asset, scan);
  const auto frame = NormalizationFrame::from_scan(scan);
  return chamfer_distance(frame.apply(farthest_point_sample(asset, budget)),
                          frame.apply(farthest_point_sample(scan, budget)));
}

double normalized_enhanced_chamfer_distance(const PointCloud& asset, const PointCloud& scan,
                                            std::size_t budget) {
  require_pair(asset, scan);
  const auto frame = NormalizationFrame::from_scan(scan);
  return enhanced_chamfer_distance(frame.apply(farthest_point_sample(asset, budget)),
                                   frame.apply(farthest_point_sample(scan, budget)));
}

double bbox_iou(const Aabb& a, const Aabb& b) {
  require(a.valid() && b.valid(), "bbox_iou: invalid box");
  const double inter = intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  if (!(uni > 0.0)) fail(ErrorCode::kDegenerate, "bbox_iou: union has zero volume");
  return std::clamp(inter / uni, 0.0, 1.0);
}

double kl_divergence(std::span<const double> p_counts, std::span<const double> q_counts,
                     bool add_one_smoothing) {
  require(p_counts.size() == q_counts.size() && !p_counts.empty(), "kl_divergence: size mismatch");
  const double extra = add_one_smoothing ? 1.0 : 0.0;
  double p_total = 0.0, q_total = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    require(p_counts[i] >= 0.0 && q_counts[i] >= 0.0, "kl_divergence: negative count");
    p_total += p_counts[i] + extra;
    q_total += q_counts[i] + extra;
  }
  require(p_total > 0.0 && q_total > 0.0, "kl_divergence: empty distribution");
  double kl = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    const double p = (p_counts[i] + extra) / p_total;
    const double q = (q_counts[i] + extra) / q_total;
    if (p == 0.0) continue;
    if (q == 0.0) return std::numeric_limits<double>::infinity();
    kl += p * std::log(p / q);
  }
  return std::max(0.0, kl);
}

std::vector<double> color_histogram(const PointCloud& cloud, int bins) {
  require(bins >= 1, "color_histogram: bins must be positive");
  require(cloud.has_colors() && cloud.colors.size() == cloud.points.size(),
          "color histogram needs per-point colors");
  const auto n = static_cast<std::size_t>(bins);
  std::vector<double> hist(n * n * n, 0.0);
  auto bin = [bins](double c) {
    return static_cast<std::size_t>(std::clamp(static_cast<int>(c * bins), 0, bins - 1));
  };
  for (const auto& c : cloud.colors) hist[(bin(c.x()) * n + bin(c.y())) * n + bin(c.z())] += 1.0;
  return hist;
}

double color_histogram_kl(const PointCloud& a, const PointCloud& b, int bins, bool add_one_smoothing) {
  return kl_divergence(color_histogram(a, bins), color_histogram(b, bins), add_one_smoothing);
}

double size_error(const Aabb& aligned, const Aabb& real) {
  require(aligned.valid() && real.valid(), "size_error: invalid box");
  return std::abs(aligned.volume() - real.volume());
}

double scale_error(std::span<const Aabb> scene_a, std::span<const Aabb> scene_b) {
  require(!scene_a.empty() && !scene_b.empty(), "scale_error: empty scene");
  return std::abs(merge(scene_a).diagonal() - merge(scene_b).diagonal());
}

double topk_accuracy(const std::vector<std::vector<std::string>>& rankings,
                     const std::vector<std::string>& truths, std::size_t k) {
  require(rankings.size() == truths.size(), "topk_accuracy: rankings and truths differ in length");
  require(!rankings.empty(), "topk_accuracy: no objects");
  require(k >= 1, "topk_accuracy: k must be >= 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const auto& r = rankings[i];
    const std::set<std::string> distinct(r.begin(), r.end());
    require(distinct.size() == r.size(), "topk_accuracy: ranking has duplicate ids");
    const auto pos = std::find(r.begin(), r.end(), truths[i]);
    if (pos == r.end()) {
      fail(ErrorCode::kNotFound, "topk_accuracy: truth '" + truths[i] + "' not among candidates");
    }
    if (static_cast<std::size_t>(pos - r.begin()) < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

double category_kl(const CategoryHistogram& generated, const CategoryHistogram& reference,
                   bool add_one_smoothing) {
  if (generated.size() != reference.size() ||
      !std::equal(generated.begin(), generated.end(), reference.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    fail(ErrorCode::kInvalidArgument, "category_kl: category sets differ");
  }
  std::vector<double> p, q;
  for (const auto& [name, count] : generated) p.push_back(count);
  for (const auto& [name, count] : reference) q.push_back(count);
  return kl_divergence(p, q, add_one_smoothing);
}

CollisionRates collision_rates(std::span<const Aabb> boxes, double iou_threshold) {
  CollisionRates out;
  if (boxes.size() < 2) return out;
  std::vector<char> hit(boxes.size(), 0);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (intersection_volume(boxes[i], boxes[j]) <= 0.0) continue;
      if (bbox_iou(boxes[i], boxes[j]) > iou_threshold) hit[i] = hit[j] = 1;
    }
  }
  const auto n = std::count(hit.begin(), hit.end(), 1);
  out.col_obj = static_cast<double>(n) / static_cast<double>(boxes.size());
  out.col_scene = n > 0 ? 1.0 : 0.0;
  return out;
}

CollisionRates collision_rates(const SceneLayout& scene, double iou_threshold) {
  const auto boxes = scene.boxes();
  return collision_rates(boxes, iou_threshold);
}

double out_of_plane_rate(const MicroScene& micro) {
  if (micro.top_surface.vertices.size() < 3) {
    fail(ErrorCode::kPrecondition, "micro-scene has no large-object top surface");
  }
  if (micro.small_objects.empty()) return 0.0;
  std::size_t outside = 0;
  for (const auto& item : micro.small_objects) {
    const Vec3 c = item.box.center();
    if (!micro.top_surface.contains(Vec2(c.x(), c.y()))) ++outside;
  }
  return static_cast<double>(outside) / static_cast<double>(micro.small_objects.size());
}

namespace {

nlohmann::ordered_json opt(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

std::string num(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, *v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["v"] = 1;
  nlohmann::ordered_json objects = nlohmann::ordered_json::object();
  for (const auto& [id, m] : per_object) {
    nlohmann::ordered_json o;
    o["cd"] = m.cd;
    o["ecd"] = m.ecd;
    o["iou"] = m.iou;
    o["color_hist_kl"] = opt(m.color_hist_kl);
    o["size_err_m3"] = m.size_err_m3;
    objects[id] = std::move(o);
  }
  j["per_object"] = std::move(objects);
  nlohmann::ordered_json s;
  s["scale_err_m"] = opt(per_scene.scale_err_m);
  s["top1"] = opt(per_scene.top1);
  s["top5"] = opt(per_scene.top5);
  s["col_obj"] = per_scene.col_obj;
  s["col_scene"] = per_scene.col_scene;
  s["r_out"] = opt(per_scene.r_out);
  s["ckl"] = opt(per_scene.ckl);
  j["per_scene"] = std::move(s);
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out << "scope,id,cd,ecd,iou,color_hist_kl,size_err_m3,scale_err_m,top1,top5,col_obj,col_scene,r_out,ckl\n";
  for (const auto& [id, m] : per_object) {
    out << "object," << id << ',' << num(m.cd) << ',' << num(m.ecd) << ',' << num(m.iou) << ','
        << num(m.color_hist_kl) << ',' << num(m.size_err_m3) << ",,,,,,,\n";
  }
  const auto& s = per_scene;
  out << "scene,,,,,,," << num(s.scale_err_m) << ',' << num(s.top1) << ',' << num(s.top5) << ','
      << num(s.col_obj) << ',' << num(s.col_scene) << ',' << num(s.r_out) << ',' << num(s.ckl) << '\n';
  return out.str();
}

}  // namespace s2s
