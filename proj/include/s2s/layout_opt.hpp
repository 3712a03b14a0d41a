#pragma once

#include "s2s/scene.hpp"
#include "s2s/scene_graph.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace s2s {

// Sum of pairwise box IoU over all unique pairs.
double collision_loss(std::span<const Aabb> boxes);
double collision_loss(const SceneLayout& scene);

using IndexPair = std::pair<std::size_t, std::size_t>;  // (low, high)

// Same sum skipping the listed index pairs.
double collision_loss(std::span<const Aabb> boxes, const std::set<IndexPair>& excluded);

// Pairs whose objects are linked by a chain of scene-graph relations; their
// overlap is intended (an object inside or embedded in another).
std::set<IndexPair> related_pairs(const SceneLayout& scene, const SceneGraph& graph);

enum class AcceptanceMode { kGreedy, kMetropolis };

struct OptimizerConfig {
  std::size_t max_steps = 1000;
  std::vector<Vec3> moves = default_moves(0.05);
  std::uint64_t seed = 0;
  std::optional<FloorPolygon> boundary;  // defaults to the scene floor
  AcceptanceMode mode = AcceptanceMode::kGreedy;
  double temperature = 0.05;  // metropolis only
  double cooling = 0.995;     // per step
  bool exclude_related_pairs = true;

  // +x, -x, +y, -y with the given step (m).
  static std::vector<Vec3> default_moves(double step);
  void validate() const;
};

struct MoveRecord {
  std::size_t step = 0;
  std::string object_id;
  bool accepted = false;
  double loss = 0.0;  // candidate loss, or the current loss when rejected before evaluation
  std::string note;   // "boundary", "graph", or empty
  Vec3 delta = Vec3::Zero();  // sampled move applied to the object and its descendants
};

struct OptimizeResult {
  SceneLayout layout;
  std::vector<double> trace;  // best loss before step 0 and after each step
  std::vector<MoveRecord> moves;
  std::size_t steps = 0;

  double final_loss() const { return trace.back(); }
  // step,object_moved,accepted,loss
  std::string moves_csv() const;
};

// Greedy (default) or Metropolis search over horizontal moves. Moving an
// object carries every object related to it as a descendant in the graph, and
// supported children are snapped onto their supporter's top. Moves leaving the
// boundary or breaking a relation are rejected. Deterministic for a seed.
OptimizeResult optimize_layout(const SceneLayout& scene, const SceneGraph& graph, const OptimizerConfig& cfg);

// True when every footprint corner is inside the polygon (edges inclusive).
bool footprint_inside(const Aabb& box, const FloorPolygon& boundary);

enum class PhysicsCategory { kRigidBody, kCloth, kSoftBody };

struct PhysicalAttributes {
  PhysicsCategory category = PhysicsCategory::kRigidBody;
  double mass = 0.0;      // kg
  double friction = 0.0;  // [0, 1.5]
  int bounciness = 0;     // 0 or 1

  // {"physics_attributes": {"category": "Rigid Body", "mass": .., "friction": .., "bounciness": ..}}
  // or the inner object directly.
  static PhysicalAttributes from_json(const std::string& text);
};

enum class VolumeClass { kSmall, kMedium, kLarge };

inline constexpr double kSmallVolumeMax = 0.05;  // m^3, exclusive
inline constexpr double kMediumVolumeMax = 1.0;  // m^3, exclusive

VolumeClass volume_class(const Aabb& box);

// Empty when valid. Mass bands by volume: small [0.1, 5], medium [5, 50], large > 50 kg.
std::vector<std::string> validate_physical_attributes(const PhysicalAttributes& attrs, const Aabb& box);

}  // namespace s2s
