#include "s2s/kdtree.hpp"

#include "s2s/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace s2s {
namespace {

bool hit_less(const KdTree::Hit& a, const KdTree::Hit& b) {
  if (a.squared_distance != b.squared_distance) return a.squared_distance < b.squared_distance;
  return a.index < b.index;
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points, std::size_t leaf_size)
    : points_(points), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  require(!points_.empty(), "KdTree: empty point set");
  require(points_.size() < std::numeric_limits<std::uint32_t>::max(), "KdTree: too many points");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0U);
  nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];

  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

KdTree::Hit KdTree::nearest(const Vec3& query) const {
  Hit best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  search_nearest(0, query, best);
  return best;
}

void KdTree::search_nearest(std::int32_t id, const Vec3& q, Hit& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const Hit h{order_[i], (points_[order_[i]] - q).squaredNorm()};
      if (hit_less(h, best)) best = h;
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0 ? node.left : node.right;
  const std::int32_t far = diff < 0 ? node.right : node.left;
  search_nearest(near, q, best);
  // Equality keeps equidistant lower-index points reachable across the plane.
  if (diff * diff <= best.squared_distance) search_nearest(far, q, best);
}

std::vector<KdTree::Hit> KdTree::k_nearest(const Vec3& query, std::size_t k) const {
  std::vector<Hit> heap;
  if (k == 0) return heap;
  heap.reserve(k + 1);
  search_k(0, query, k, heap);
  std::sort_heap(heap.begin(), heap.end(), hit_less);
  return heap;
}

void KdTree::search_k(std::int32_t id, const Vec3& q, std::size_t k, std::vector<Hit>& heap) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const Hit h{order_[i], (points_[order_[i]] - q).squaredNorm()};
      if (heap.size() < k) {
        heap.push_back(h);
        std::push_heap(heap.begin(), heap.end(), hit_less);
      } else if (hit_less(h, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), hit_less);
        heap.back() = h;
        std::push_heap(heap.begin(), heap.end(), hit_less);
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0 ? node.left : node.right;
  const std::int32_t far = diff < 0 ? node.right : node.left;
  search_k(near, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().squared_distance) search_k(far, q, k, heap);
}

}  // namespace s2s
