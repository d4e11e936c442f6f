#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "ghpsnr/point_cloud.hpp"
#include "ghpsnr/spatial_index.hpp"

namespace ghpsnr {

inline constexpr std::size_t kDefaultNormalNeighbors = 12;

/// Unit eigenvector for the smallest eigenvalue of a symmetric 3x3 matrix.
///
/// Eigenvalues closer than kEigenTieTolerance (relative to the largest
/// eigenvalue magnitude) to the smallest one are treated as tied. For a tied
/// eigenspace the result is the normalized projection of a coordinate axis
/// onto it, choosing the lexicographically smallest candidate. The sign is
/// fixed so that the first component with magnitude above 1e-12 is positive.
Vec3 smallest_eigenvector(const Eigen::Matrix3d& symmetric);

inline constexpr double kEigenTieTolerance = 1e-12;

/// PCA normals from the k nearest neighbours of each point (the point itself
/// excluded). Clouds that already carry normals are returned unchanged.
///
/// Throws ValidationError when k < 3 or k >= cloud.size(), and NumericError
/// naming the point index when a neighbourhood collapses to a single location.
PointCloud estimate_normals(const PointCloud& cloud, std::size_t k = kDefaultNormalNeighbors);

/// Same, reusing an index already built over `cloud`.
PointCloud estimate_normals(const PointCloud& cloud, const SpatialIndex& index, std::size_t k);

}  // namespace ghpsnr
