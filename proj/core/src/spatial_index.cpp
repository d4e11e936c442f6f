#include "ghpsnr/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "ghpsnr/errors.hpp"

namespace ghpsnr {

namespace {

// Lower bound on the squared distance from q to any point inside [lo, hi],
// accumulated in the same order as squared_distance so the bound never
// exceeds a true distance after rounding.
double box_distance(const Vec3& q, const Vec3& lo, const Vec3& hi) {
  double d[3];
  for (int a = 0; a < 3; ++a) {
    if (q[a] < lo[a]) {
      d[a] = lo[a] - q[a];
    } else if (q[a] > hi[a]) {
      d[a] = q[a] - hi[a];
    } else {
      d[a] = 0.0;
    }
  }
  return d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
}

bool closer(double d, std::size_t i, const Neighbor& best) {
  return d < best.squared_distance || (d == best.squared_distance && i < best.index);
}

struct NeighborOrder {
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return a.squared_distance < b.squared_distance ||
           (a.squared_distance == b.squared_distance && a.index < b.index);
  }
};

}  // namespace

SpatialIndex::SpatialIndex(const PointCloud& cloud) {
  if (cloud.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("spatial index: cloud too large");
  }
  points_ = cloud.points();
  ids_.resize(points_.size());
  std::iota(ids_.begin(), ids_.end(), 0u);
  nodes_.reserve(2 * (points_.size() / kLeafSize + 1));
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = points_[begin];
  node.hi = points_[begin];
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    node.lo = node.lo.cwiseMin(points_[i]);
    node.hi = node.hi.cwiseMax(points_[i]);
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);

  const Vec3 extent = node.hi - node.lo;
  if (end - begin <= kLeafSize || extent.maxCoeff() == 0.0) return id;

  int axis = 0;
  if (extent[1] > extent[axis]) axis = 1;
  if (extent[2] > extent[axis]) axis = 2;

  // Median split; (coordinate, original index) ordering keeps the layout
  // independent of the nth_element implementation.
  std::vector<std::uint32_t> order(end - begin);
  std::iota(order.begin(), order.end(), begin);
  const std::uint32_t mid = (end - begin) / 2;
  std::nth_element(order.begin(), order.begin() + mid, order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis];
                     const double cb = points_[b][axis];
                     return ca < cb || (ca == cb && ids_[a] < ids_[b]);
                   });
  std::vector<Vec3> pts(order.size());
  std::vector<std::uint32_t> ids(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    pts[i] = points_[order[i]];
    ids[i] = ids_[order[i]];
  }
  std::copy(pts.begin(), pts.end(), points_.begin() + begin);
  std::copy(ids.begin(), ids.end(), ids_.begin() + begin);

  const std::int32_t left = build(begin, begin + mid);
  const std::int32_t right = build(begin + mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

Neighbor SpatialIndex::nearest(const Vec3& query) const {
  if (!query.allFinite()) throw ValidationError("nearest: non-finite query point");
  Neighbor best;
  best.index = std::numeric_limits<std::size_t>::max();
  search_nearest(0, query, best);
  return best;
}

void SpatialIndex::search_nearest(std::int32_t id, const Vec3& q, Neighbor& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const double d = squared_distance(q, points_[i]);
      if (closer(d, ids_[i], best)) best = {ids_[i], d};
    }
    return;
  }
  const Node& l = nodes_[static_cast<std::size_t>(node.left)];
  const Node& r = nodes_[static_cast<std::size_t>(node.right)];
  const double dl = box_distance(q, l.lo, l.hi);
  const double dr = box_distance(q, r.lo, r.hi);
  // Equal bounds still have to be visited: an equidistant point with a lower
  // index may live there.
  if (dl <= dr) {
    if (dl <= best.squared_distance) search_nearest(node.left, q, best);
    if (dr <= best.squared_distance) search_nearest(node.right, q, best);
  } else {
    if (dr <= best.squared_distance) search_nearest(node.right, q, best);
    if (dl <= best.squared_distance) search_nearest(node.left, q, best);
  }
}

template <typename Heap>
void SpatialIndex::search_knn(std::int32_t id, const Vec3& q, std::size_t k, std::size_t exclude,
                              Heap& heap) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  auto bound = [&]() {
    return heap.size() < k ? std::numeric_limits<double>::infinity()
                           : heap.top().squared_distance;
  };
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      if (ids_[i] == exclude) continue;
      const Neighbor cand{ids_[i], squared_distance(q, points_[i])};
      if (heap.size() < k) {
        heap.push(cand);
      } else if (NeighborOrder{}(cand, heap.top())) {
        heap.pop();
        heap.push(cand);
      }
    }
    return;
  }
  const Node& l = nodes_[static_cast<std::size_t>(node.left)];
  const Node& r = nodes_[static_cast<std::size_t>(node.right)];
  const double dl = box_distance(q, l.lo, l.hi);
  const double dr = box_distance(q, r.lo, r.hi);
  const std::int32_t first = dl <= dr ? node.left : node.right;
  const std::int32_t second = dl <= dr ? node.right : node.left;
  const double d_first = std::min(dl, dr);
  const double d_second = std::max(dl, dr);
  if (d_first <= bound()) search_knn(first, q, k, exclude, heap);
  if (d_second <= bound()) search_knn(second, q, k, exclude, heap);
}

std::vector<Neighbor> SpatialIndex::k_nearest(const Vec3& query, std::size_t k,
                                              std::size_t exclude) const {
  if (!query.allFinite()) throw ValidationError("k_nearest: non-finite query point");
  if (k == 0) return {};
  std::priority_queue<Neighbor, std::vector<Neighbor>, NeighborOrder> heap;
  search_knn(0, query, k, exclude, heap);
  std::vector<Neighbor> out;
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace ghpsnr
