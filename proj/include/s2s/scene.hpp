#pragma once

#include "s2s/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace s2s {

struct SceneObject {
  std::string id;
  std::string category;
  Aabb box;
  std::string asset_id;               // empty until an asset is placed
  std::optional<PoseTransform> pose;  // asset -> scan frame
};

struct SceneLayout {
  std::string scene_id;
  FloorPolygon floor;
  double floor_z = 0.0;
  std::vector<SceneObject> objects;

  // Index of the object with this id, or -1.
  int find(const std::string& id) const;
  std::vector<Aabb> boxes() const;
};

// One large furniture piece plus the small objects it supports.
struct MicroScene {
  struct Item {
    std::string id;
    std::string category;
    Aabb box;
  };
  Item large;
  FloorPolygon top_surface;
  std::vector<Item> small_objects;
};

// Axis-aligned top face of a box as a counterclockwise polygon.
FloorPolygon top_surface(const Aabb& box);

}  // namespace s2s
