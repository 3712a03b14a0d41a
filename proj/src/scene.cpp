#include "s2s/scene.hpp"

namespace s2s {

int SceneLayout::find(const std::string& id) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

std::vector<Aabb> SceneLayout::boxes() const {
  std::vector<Aabb> out;
  out.reserve(objects.size());
  for (const auto& o : objects) out.push_back(o.box);
  return out;
}

FloorPolygon top_surface(const Aabb& box) {
  return FloorPolygon{{Vec2(box.min.x(), box.min.y()), Vec2(box.max.x(), box.min.y()),
                       Vec2(box.max.x(), box.max.y()), Vec2(box.min.x(), box.max.y())}};
}

}  // namespace s2s
