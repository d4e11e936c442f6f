#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ghpsnr {

using Vec3 = Eigen::Vector3d;

/// Squared Euclidean distance, evaluated as ((dx*dx + dy*dy) + dz*dz).
///
/// Every exact-distance comparison in the library goes through this one
/// expression so that ties are decided on bit-identical values.
inline double squared_distance(const Vec3& a, const Vec3& b) noexcept {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

/// A validated point cloud.
///
/// Invariants (checked on construction, so any PointCloud instance is valid):
///  - at least one point, all coordinates finite;
///  - normals, when present, have one entry per point and unit norm within 1e-6.
///
/// Point order is significant: it is the identity used for tie-breaking in
/// nearest-neighbour queries and the order of per-point outputs.
class PointCloud {
 public:
  static constexpr double kNormalTolerance = 1e-6;

  PointCloud(std::string name, std::vector<Vec3> points,
             std::optional<std::vector<Vec3>> normals = std::nullopt,
             std::optional<int> precision_bits = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Vec3>& points() const noexcept { return points_; }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  bool has_normals() const noexcept { return normals_.has_value(); }
  /// Precondition: has_normals().
  const std::vector<Vec3>& normals() const { return *normals_; }

  std::optional<int> precision_bits() const noexcept { return precision_bits_; }

  /// Signal peak 2^precision - 1 when the precision is known.
  std::optional<double> signal_peak() const noexcept;

  PointCloud with_normals(std::vector<Vec3> normals) const;
  PointCloud without_normals() const;
  PointCloud renamed(std::string name) const;

 private:
  std::string name_;
  std::vector<Vec3> points_;
  std::optional<std::vector<Vec3>> normals_;
  std::optional<int> precision_bits_;
};

/// Signal peak for a given bit depth: 2^bits - 1 (10 -> 1023, 12 -> 4095).
double peak_from_precision(int bits);

}  // namespace ghpsnr
