#pragma once

#include "s2s/scene.hpp"

#include <string>
#include <vector>

namespace s2s {

enum class RelationKind { kSupport, kContainment, kEmbedding };

const char* relation_kind_name(RelationKind kind);
RelationKind parse_relation_kind(const std::string& name);

struct RelationEvidence {
  double vertical_gap = 0.0;         // child bottom - parent top (m)
  double overlap_ratio = 0.0;        // footprint overlap / child footprint area
  double volume_inside_ratio = 0.0;  // child volume inside parent / child volume
};

struct Relation {
  RelationKind kind = RelationKind::kSupport;
  std::string parent;
  std::string child;
  RelationEvidence evidence;

  bool operator==(const Relation& o) const {
    return kind == o.kind && parent == o.parent && child == o.child;
  }
};

struct GraphThresholds {
  double support_gap_min = -0.01;
  double support_gap_max = 0.02;
  double support_overlap_min = 0.3;
  double containment_inside_min = 0.9;
  double containment_inflate = 0.02;
  double embedding_inside_min = 0.1;  // exclusive
  double embedding_inside_max = 0.9;  // exclusive
};

struct SceneGraph {
  std::vector<std::string> nodes;
  std::vector<Relation> relations;        // sorted by (kind, parent, child)
  std::vector<std::string> floor_supported;  // children of the implicit floor root

  std::vector<const Relation*> children_of(const std::string& parent) const;
  const Relation* parent_of(const std::string& child, RelationKind kind) const;
};

// Evidence for one ordered pair, as the rules see it.
RelationEvidence pair_evidence(const Aabb& parent, const Aabb& child, RelationKind kind,
                               const GraphThresholds& th = {});

bool satisfies(RelationKind kind, const RelationEvidence& ev, const GraphThresholds& th = {});

// Rule-based relations over every ordered pair:
//  - containment: >= 0.9 of the child inside the parent inflated by 2 cm, parent strictly larger;
//    the tightest container wins.
//  - support: child bottom within [-1, +2] cm of the parent top, >= 30% footprint overlap,
//    child bottom above parent bottom; the nearest top surface wins.
//  - embedding: child 10-90% inside a larger parent, not resting at the parent's base level;
//    the deepest such parent wins.
// A child keeps a single parent: its supporter if any, else its container, else its embedding.
// Objects with no supporter whose bottom sits on floor_z are recorded as floor-supported.
SceneGraph build_scene_graph(const SceneLayout& scene, const GraphThresholds& th = {});

struct GraphViolation {
  Relation relation;  // parent "floor" for floor-supported objects
  std::string reason;
};

// Relations whose thresholds no longer hold for the current boxes. Throws
// kNotFound when the graph references an id missing from the scene.
std::vector<GraphViolation> validate_graph(const SceneGraph& graph, const SceneLayout& scene,
                                           const GraphThresholds& th = {});

inline constexpr const char* kFloorId = "floor";

}  // namespace s2s
