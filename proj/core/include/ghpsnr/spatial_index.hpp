#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "ghpsnr/point_cloud.hpp"

namespace ghpsnr {

struct Neighbor {
  std::size_t index = 0;
  double squared_distance = std::numeric_limits<double>::infinity();

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact nearest-neighbour index over one point cloud.
///
/// A balanced kd-tree with median splits on the widest bounding-box axis.
/// The tree keeps its own copy of the coordinates, so it does not depend on
/// the lifetime of the cloud it was built from. After construction it is
/// immutable and every query is const and thread-safe.
///
/// Results are exact: the reported squared distance is the true minimum over
/// all indexed points, and among equidistant points the lowest point index
/// wins.
class SpatialIndex {
 public:
  static constexpr std::size_t kLeafSize = 8;

  explicit SpatialIndex(const PointCloud& cloud);

  std::size_t size() const noexcept { return points_.size(); }

  /// Throws ValidationError for a non-finite query.
  Neighbor nearest(const Vec3& query) const;

  /// The k nearest points ordered by (distance, index), optionally skipping
  /// one point index (used to exclude a query point from its own
  /// neighbourhood). Returns fewer than k entries only when the index holds
  /// fewer eligible points.
  std::vector<Neighbor> k_nearest(const Vec3& query, std::size_t k,
                                  std::size_t exclude = kNoExclude) const;

  static constexpr std::size_t kNoExclude = std::numeric_limits<std::size_t>::max();

 private:
  struct Node {
    Vec3 lo;
    Vec3 hi;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;  // -1 marks a leaf
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search_nearest(std::int32_t node, const Vec3& q, Neighbor& best) const;
  template <typename Heap>
  void search_knn(std::int32_t node, const Vec3& q, std::size_t k, std::size_t exclude,
                  Heap& heap) const;

  std::vector<Vec3> points_;          // tree order
  std::vector<std::uint32_t> ids_;    // original index of points_[i]
  std::vector<Node> nodes_;
};

}  // namespace ghpsnr
