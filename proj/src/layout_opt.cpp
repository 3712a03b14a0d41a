#include "s2s/layout_opt.hpp"

#include "s2s/error.hpp"
#include "s2s/metrics.hpp"
#include "s2s/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace s2s {
namespace {

double pair_iou(const Aabb& a, const Aabb& b) {
  if (intersection_volume(a, b) <= 0.0) return 0.0;
  return bbox_iou(a, b);
}

}  // namespace

double collision_loss(std::span<const Aabb> boxes) { return collision_loss(boxes, {}); }

double collision_loss(const SceneLayout& scene) {
  const auto boxes = scene.boxes();
  return collision_loss(boxes);
}

double collision_loss(std::span<const Aabb> boxes, const std::set<IndexPair>& excluded) {
  double loss = 0.0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (!excluded.empty() && excluded.count({i, j})) continue;
      loss += pair_iou(boxes[i], boxes[j]);
    }
  }
  return loss;
}

namespace {

// Descendants through any relation kind, as object indices.
std::vector<std::vector<std::size_t>> descendant_lists(const SceneLayout& scene, const SceneGraph& graph) {
  const std::size_t m = scene.objects.size();
  std::vector<std::vector<std::size_t>> children(m);
  for (const auto& r : graph.relations) {
    const int p = scene.find(r.parent);
    const int c = scene.find(r.child);
    if (p < 0 || c < 0) fail(ErrorCode::kNotFound, "scene graph references an unknown object");
    children[static_cast<std::size_t>(p)].push_back(static_cast<std::size_t>(c));
  }
  std::vector<std::vector<std::size_t>> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<char> seen(m, 0);
    std::vector<std::size_t> stack{i};
    seen[i] = 1;
    while (!stack.empty()) {
      const auto n = stack.back();
      stack.pop_back();
      for (auto c : children[n]) {
        if (seen[c]) continue;
        seen[c] = 1;
        out[i].push_back(c);
        stack.push_back(c);
      }
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

}  // namespace

std::set<IndexPair> related_pairs(const SceneLayout& scene, const SceneGraph& graph) {
  std::set<IndexPair> out;
  const auto desc = descendant_lists(scene, graph);
  for (std::size_t i = 0; i < desc.size(); ++i) {
    for (auto d : desc[i]) out.insert({std::min(i, d), std::max(i, d)});
  }
  return out;
}

std::vector<Vec3> OptimizerConfig::default_moves(double step) {
  return {Vec3(step, 0, 0), Vec3(-step, 0, 0), Vec3(0, step, 0), Vec3(0, -step, 0)};
}

void OptimizerConfig::validate() const {
  if (moves.empty()) fail(ErrorCode::kInvalidArgument, "optimizer move set is empty");
  for (const auto& m : moves) {
    if (!m.allFinite() || !(m.norm() > 0.0)) fail(ErrorCode::kInvalidArgument, "optimizer step sizes must be positive");
  }
  if (max_steps < 1) fail(ErrorCode::kInvalidArgument, "max_steps must be >= 1");
  if (mode == AcceptanceMode::kMetropolis && !(temperature > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "metropolis temperature must be positive");
  }
}

bool footprint_inside(const Aabb& box, const FloorPolygon& boundary) {
  return boundary.contains(Vec2(box.min.x(), box.min.y())) && boundary.contains(Vec2(box.max.x(), box.min.y())) &&
         boundary.contains(Vec2(box.max.x(), box.max.y())) && boundary.contains(Vec2(box.min.x(), box.max.y()));
}

std::string OptimizeResult::moves_csv() const {
  std::ostringstream out;
  out << "step,object_moved,accepted,loss\n";
  for (const auto& m : moves) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, m.loss);
    out << m.step << ',' << m.object_id << ',' << (m.accepted ? 1 : 0) << ',' << std::string(buf, res.ptr) << '\n';
  }
  return out.str();
}

namespace {

// Pairwise IoU table; the total is summed in (i, j) order so it matches
// collision_loss bit for bit.
class PairTable {
 public:
  PairTable(std::span<const Aabb> boxes, const std::set<IndexPair>& excluded)
      : m_(boxes.size()), excluded_(m_ * m_, 0), iou_(m_ * m_, 0.0) {
    for (const auto& [a, b] : excluded) excluded_[a * m_ + b] = 1;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = i + 1; j < m_; ++j) iou_[i * m_ + j] = value(boxes, i, j);
  }

  double value(std::span<const Aabb> boxes, std::size_t i, std::size_t j) const {
    return excluded_[i * m_ + j] ? 0.0 : pair_iou(boxes[i], boxes[j]);
  }

  // Total if the rows/columns of `moved` were recomputed from `boxes`.
  double total_with(std::span<const Aabb> boxes, const std::vector<char>& moved, std::vector<double>& scratch) const {
    scratch = iou_;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = i + 1; j < m_; ++j)
        if (moved[i] || moved[j]) scratch[i * m_ + j] = value(boxes, i, j);
    return sum(scratch);
  }

  void commit(std::vector<double>& scratch) { iou_.swap(scratch); }
  double total() const { return sum(iou_); }

 private:
  double sum(const std::vector<double>& t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = i + 1; j < m_; ++j)
        if (!excluded_[i * m_ + j]) s += t[i * m_ + j];
    return s;
  }

  std::size_t m_;
  std::vector<char> excluded_;
  std::vector<double> iou_;
};

}  // namespace

OptimizeResult optimize_layout(const SceneLayout& scene, const SceneGraph& graph, const OptimizerConfig& cfg) {
  cfg.validate();
  const FloorPolygon boundary = cfg.boundary ? *cfg.boundary : scene.floor;
  if (boundary.vertices.size() < 3) fail(ErrorCode::kPrecondition, "optimizer needs a boundary polygon");
  const auto initial = validate_graph(graph, scene);
  if (!initial.empty()) {
    fail(ErrorCode::kPrecondition, "scene graph is not valid for the input scene (" +
                                       std::to_string(initial.size()) + " violations)");
  }

  const std::size_t m = scene.objects.size();
  const auto desc = descendant_lists(scene, graph);
  const std::set<IndexPair> excluded = cfg.exclude_related_pairs ? related_pairs(scene, graph) : std::set<IndexPair>{};

  // Support children to snap after a move: (parent, child) indices.
  std::vector<IndexPair> support_edges;
  for (const auto& r : graph.relations) {
    if (r.kind != RelationKind::kSupport) continue;
    support_edges.emplace_back(static_cast<std::size_t>(scene.find(r.parent)),
                               static_cast<std::size_t>(scene.find(r.child)));
  }

  OptimizeResult res;
  res.layout = scene;
  std::vector<Aabb> boxes = scene.boxes();
  PairTable table(boxes, excluded);
  double current = table.total();
  double best = current;
  std::vector<Aabb> best_boxes = boxes;
  res.trace.push_back(best);

  Rng rng(cfg.seed);
  double temperature = cfg.temperature;
  std::vector<Aabb> candidate(boxes);
  std::vector<char> moved(m, 0);
  std::vector<double> scratch;
  SceneLayout probe = scene;

  std::size_t n = 0;
  while (best > 0.0 && n < cfg.max_steps) {
    for (std::size_t i = 0; i < m; ++i) {
      const Vec3& delta = cfg.moves[static_cast<std::size_t>(rng.below(cfg.moves.size()))];
      MoveRecord rec{n, scene.objects[i].id, false, current, {}, delta};

      candidate = boxes;
      std::fill(moved.begin(), moved.end(), 0);
      moved[i] = 1;
      for (auto d : desc[i]) moved[d] = 1;
      for (std::size_t k = 0; k < m; ++k) {
        if (!moved[k]) continue;
        candidate[k].min += delta;
        candidate[k].max += delta;
      }
      // Vertical projection: supported children sit exactly on their parent's top.
      for (const auto& [p, c] : support_edges) {
        if (!moved[p]) continue;
        const double dz = candidate[p].max.z() - candidate[c].min.z();
        if (dz == 0.0) continue;
        candidate[c].min.z() += dz;
        candidate[c].max.z() += dz;
        for (auto d : desc[c]) {
          candidate[d].min.z() += dz;
          candidate[d].max.z() += dz;
        }
      }

      bool inside = true;
      for (std::size_t k = 0; k < m && inside; ++k) {
        if (moved[k] && !footprint_inside(candidate[k], boundary)) inside = false;
      }
      if (!inside) {
        rec.note = "boundary";
        res.moves.push_back(std::move(rec));
        continue;
      }
      for (std::size_t k = 0; k < m; ++k) probe.objects[k].box = candidate[k];
      if (!validate_graph(graph, probe).empty()) {
        rec.note = "graph";
        res.moves.push_back(std::move(rec));
        continue;
      }

      const double loss = table.total_with(candidate, moved, scratch);
      rec.loss = loss;
      bool accept = false;
      if (cfg.mode == AcceptanceMode::kGreedy) {
        accept = loss < best;
      } else {
        accept = loss < current || rng.uniform() < std::exp(-(loss - current) / temperature);
      }
      if (accept) {
        boxes = candidate;
        table.commit(scratch);
        current = loss;
        if (loss < best) {
          best = loss;
          best_boxes = boxes;
        }
      }
      rec.accepted = accept;
      res.moves.push_back(std::move(rec));
    }
    ++n;
    temperature *= cfg.cooling;
    res.trace.push_back(best);
  }

  res.steps = n;
  for (std::size_t k = 0; k < m; ++k) res.layout.objects[k].box = best_boxes[k];
  // Carry the pose along with the box so placed assets follow their objects.
  for (std::size_t k = 0; k < m; ++k) {
    auto& obj = res.layout.objects[k];
    if (obj.pose) obj.pose->translation += best_boxes[k].min - scene.objects[k].box.min;
  }
  return res;
}

PhysicalAttributes PhysicalAttributes::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("physical attributes: ") + e.what());
  }
  if (j.contains("physics_attributes")) j = j["physics_attributes"];
  for (const char* key : {"category", "mass", "friction", "bounciness"}) {
    if (!j.contains(key)) fail(ErrorCode::kMalformed, std::string("physical attributes: missing ") + key);
  }
  PhysicalAttributes a;
  std::string cat = j["category"].get<std::string>();
  std::transform(cat.begin(), cat.end(), cat.begin(), [](unsigned char c) {
    return c == ' ' ? '_' : static_cast<char>(std::tolower(c));
  });
  if (cat == "rigid_body") a.category = PhysicsCategory::kRigidBody;
  else if (cat == "cloth") a.category = PhysicsCategory::kCloth;
  else if (cat == "soft_body") a.category = PhysicsCategory::kSoftBody;
  else fail(ErrorCode::kMalformed, "physical attributes: unknown category " + j["category"].get<std::string>());
  a.mass = j["mass"].get<double>();
  a.friction = j["friction"].get<double>();
  if (!j["bounciness"].is_number_integer()) fail(ErrorCode::kMalformed, "physical attributes: bounciness must be an integer");
  a.bounciness = j["bounciness"].get<int>();
  return a;
}

VolumeClass volume_class(const Aabb& box) {
  const double v = box.volume();
  if (v < kSmallVolumeMax) return VolumeClass::kSmall;
  if (v < kMediumVolumeMax) return VolumeClass::kMedium;
  return VolumeClass::kLarge;
}

std::vector<std::string> validate_physical_attributes(const PhysicalAttributes& attrs, const Aabb& box) {
  require(box.valid(), "validate_physical_attributes: invalid box");
  std::vector<std::string> out;
  if (!std::isfinite(attrs.mass) || !(attrs.mass > 0.0)) {
    out.push_back("mass must be positive");
  } else {
    switch (volume_class(box)) {
      case VolumeClass::kSmall:
        if (attrs.mass < 0.1 || attrs.mass > 5.0) out.push_back("mass outside [0.1, 5] kg for a small object");
        break;
      case VolumeClass::kMedium:
        if (attrs.mass < 5.0 || attrs.mass > 50.0) out.push_back("mass outside [5, 50] kg for a medium object");
        break;
      case VolumeClass::kLarge:
        if (attrs.mass <= 50.0) out.push_back("mass must exceed 50 kg for a large object");
        break;
    }
  }
  if (!std::isfinite(attrs.friction) || attrs.friction < 0.0 || attrs.friction > 1.5) {
    out.push_back("friction outside [0, 1.5]");
  }
  if (attrs.bounciness != 0 && attrs.bounciness != 1) out.push_back("bounciness must be 0 or 1");
  return out;
}

}  // namespace s2s
