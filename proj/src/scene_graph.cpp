#include "s2s/scene_graph.hpp"

#include "s2s/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <tuple>

namespace s2s {

const char* relation_kind_name(RelationKind kind) {
  switch (kind) {
    case RelationKind::kSupport: return "support";
    case RelationKind::kContainment: return "containment";
    case RelationKind::kEmbedding: return "embedding";
  }
  return "support";
}

RelationKind parse_relation_kind(const std::string& name) {
  if (name == "support") return RelationKind::kSupport;
  if (name == "containment") return RelationKind::kContainment;
  if (name == "embedding") return RelationKind::kEmbedding;
  fail(ErrorCode::kMalformed, "unknown relation kind '" + name + "'");
}

std::vector<const Relation*> SceneGraph::children_of(const std::string& parent) const {
  std::vector<const Relation*> out;
  for (const auto& r : relations) {
    if (r.parent == parent) out.push_back(&r);
  }
  return out;
}

const Relation* SceneGraph::parent_of(const std::string& child, RelationKind kind) const {
  for (const auto& r : relations) {
    if (r.child == child && r.kind == kind) return &r;
  }
  return nullptr;
}

namespace {

double footprint_overlap_ratio(const Aabb& parent, const Aabb& child) {
  const double cw = child.max.x() - child.min.x();
  const double cd = child.max.y() - child.min.y();
  const double area = cw * cd;
  if (!(area > 0.0)) return 0.0;
  const double ox = std::min(parent.max.x(), child.max.x()) - std::max(parent.min.x(), child.min.x());
  const double oy = std::min(parent.max.y(), child.max.y()) - std::max(parent.min.y(), child.min.y());
  if (ox <= 0.0 || oy <= 0.0) return 0.0;
  return std::min(1.0, ox * oy / area);
}

double inside_ratio(const Aabb& parent, const Aabb& child) {
  const double v = child.volume();
  if (!(v > 0.0)) return 0.0;
  return std::min(1.0, intersection_volume(parent, child) / v);
}

Aabb inflate(const Aabb& box, double by) {
  return Aabb{box.min - Vec3::Constant(by), box.max + Vec3::Constant(by)};
}

// Strict size order so containment and embedding edges cannot form cycles.
bool larger(const SceneObject& a, const SceneObject& b) {
  const double va = a.box.volume(), vb = b.box.volume();
  return va != vb ? va > vb : a.id < b.id;
}

bool within_gap(double gap, const GraphThresholds& th) {
  return gap >= th.support_gap_min && gap <= th.support_gap_max;
}

}  // namespace

RelationEvidence pair_evidence(const Aabb& parent, const Aabb& child, RelationKind kind,
                               const GraphThresholds& th) {
  RelationEvidence ev;
  ev.vertical_gap = child.min.z() - parent.max.z();
  ev.overlap_ratio = footprint_overlap_ratio(parent, child);
  ev.volume_inside_ratio = kind == RelationKind::kContainment
                               ? inside_ratio(inflate(parent, th.containment_inflate), child)
                               : inside_ratio(parent, child);
  return ev;
}

bool satisfies(RelationKind kind, const RelationEvidence& ev, const GraphThresholds& th) {
  switch (kind) {
    case RelationKind::kSupport:
      return within_gap(ev.vertical_gap, th) && ev.overlap_ratio >= th.support_overlap_min;
    case RelationKind::kContainment:
      return ev.volume_inside_ratio >= th.containment_inside_min;
    case RelationKind::kEmbedding:
      return ev.volume_inside_ratio > th.embedding_inside_min && ev.volume_inside_ratio < th.embedding_inside_max;
  }
  return false;
}

SceneGraph build_scene_graph(const SceneLayout& scene, const GraphThresholds& th) {
  SceneGraph g;
  const auto& objs = scene.objects;
  std::set<std::string> ids;
  for (const auto& o : objs) {
    if (!ids.insert(o.id).second) fail(ErrorCode::kDuplicateId, "duplicate object id '" + o.id + "'");
    g.nodes.push_back(o.id);
  }
  std::sort(g.nodes.begin(), g.nodes.end());

  for (std::size_t c = 0; c < objs.size(); ++c) {
    const SceneObject& child = objs[c];
    std::optional<Relation> container, supporter, embedded;
    double container_volume = 0.0;

    for (std::size_t p = 0; p < objs.size(); ++p) {
      if (p == c) continue;
      const SceneObject& parent = objs[p];

      const auto cont = pair_evidence(parent.box, child.box, RelationKind::kContainment, th);
      const bool is_container = larger(parent, child) && satisfies(RelationKind::kContainment, cont, th);
      if (is_container) {
        // Tightest container: smallest volume, then id.
        if (!container || std::make_tuple(parent.box.volume(), parent.id) <
                              std::make_tuple(container_volume, container->parent)) {
          container = Relation{RelationKind::kContainment, parent.id, child.id, cont};
          container_volume = parent.box.volume();
        }
        continue;
      }

      const auto sup = pair_evidence(parent.box, child.box, RelationKind::kSupport, th);
      const bool is_supporter = child.box.min.z() > parent.box.min.z() && satisfies(RelationKind::kSupport, sup, th);
      if (is_supporter) {
        if (!supporter || std::make_tuple(std::abs(sup.vertical_gap), parent.id) <
                              std::make_tuple(std::abs(supporter->evidence.vertical_gap), supporter->parent)) {
          supporter = Relation{RelationKind::kSupport, parent.id, child.id, sup};
        }
        continue;
      }

      const auto emb = pair_evidence(parent.box, child.box, RelationKind::kEmbedding, th);
      if (larger(parent, child) && child.box.min.z() > parent.box.min.z() + th.support_gap_max &&
          satisfies(RelationKind::kEmbedding, emb, th)) {
        // Deepest embedding wins: largest inside ratio, then id.
        if (!embedded || std::make_tuple(-emb.volume_inside_ratio, parent.id) <
                             std::make_tuple(-embedded->evidence.volume_inside_ratio, embedded->parent)) {
          embedded = Relation{RelationKind::kEmbedding, parent.id, child.id, emb};
        }
      }
    }
    // One parent per child: support, then containment, then embedding.
    if (supporter) {
      g.relations.push_back(*supporter);
    } else if (container) {
      g.relations.push_back(*container);
    } else if (embedded) {
      g.relations.push_back(*embedded);
    }
    if (!supporter && within_gap(child.box.min.z() - scene.floor_z, th)) g.floor_supported.push_back(child.id);
  }

  std::sort(g.relations.begin(), g.relations.end(), [](const Relation& a, const Relation& b) {
    return std::make_tuple(static_cast<int>(a.kind), a.parent, a.child) <
           std::make_tuple(static_cast<int>(b.kind), b.parent, b.child);
  });
  std::sort(g.floor_supported.begin(), g.floor_supported.end());
  return g;
}

std::vector<GraphViolation> validate_graph(const SceneGraph& graph, const SceneLayout& scene,
                                           const GraphThresholds& th) {
  auto box_of = [&](const std::string& id) -> const Aabb& {
    const int i = scene.find(id);
    if (i < 0) fail(ErrorCode::kNotFound, "scene graph references unknown object '" + id + "'");
    return scene.objects[static_cast<std::size_t>(i)].box;
  };
  std::vector<GraphViolation> out;
  for (const auto& r : graph.relations) {
    const Aabb& parent = box_of(r.parent);
    const Aabb& child = box_of(r.child);
    Relation now = r;
    now.evidence = pair_evidence(parent, child, r.kind, th);
    if (!satisfies(r.kind, now.evidence, th)) {
      out.push_back({now, std::string(relation_kind_name(r.kind)) + " thresholds no longer hold"});
    }
  }
  for (const auto& id : graph.floor_supported) {
    const Aabb& child = box_of(id);
    const double gap = child.min.z() - scene.floor_z;
    if (!within_gap(gap, th)) {
      Relation r{RelationKind::kSupport, kFloorId, id, RelationEvidence{gap, 1.0, 0.0}};
      out.push_back({r, "object no longer rests on the floor"});
    }
  }
  return out;
}

}  // namespace s2s
