#pragma once

#include "s2s/geometry.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace s2s {

// Static 3-d tree over a borrowed point array. Queries are exact; ties in
// distance resolve to the lower point index so results are deterministic.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points, std::size_t leaf_size = 12);

  struct Hit {
    std::size_t index;
    double squared_distance;
  };

  Hit nearest(const Vec3& query) const;

  // Up to k hits sorted by (distance, index).
  std::vector<Hit> k_nearest(const Vec3& query, std::size_t k) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search_nearest(std::int32_t node, const Vec3& q, Hit& best) const;
  void search_k(std::int32_t node, const Vec3& q, std::size_t k, std::vector<Hit>& heap) const;

  std::span<const Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace s2s
