#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

#include "ghpsnr/point_cloud.hpp"

namespace ghpsnr {

// Seeded geometric distortions standing in for real codecs. Randomness comes
// from std::mt19937_64 seeded with DistortionSpec::seed; results are reproducible
// run to run with the same standard library.

struct OctreePrune {
  int depth = 6;
};

struct GaussianJitter {
  double sigma = 1.0;
};

struct OutlierInject {
  double fraction = 0.01;
  double magnitude = 1.0;
};

struct DistortionSpec {
  std::variant<OctreePrune, GaussianJitter, OutlierInject> kind;
  std::uint64_t seed = 0;

  /// Throws ValidationError on non-positive parameters or fraction >= 1.
  void validate() const;
};

/// Uniform grid over the cloud's bounding cube: the tight axis-aligned box
/// grown to a cube about its centre, split into 2^depth cells per axis.
struct OctreeGrid {
  Vec3 origin;
  double leaf = 0.0;
  std::uint32_t cells = 1;  // per axis

  OctreeGrid(const PointCloud& cloud, int depth);
  Vec3 center_of(const Vec3& p) const;
};

/// Snaps every point to the centre of its occupied leaf and drops duplicate
/// leaves, keeping the order of first occurrence. depth must be in [1, 21].
PointCloud octree_prune(const PointCloud& cloud, int depth);

/// Adds i.i.d. N(0, sigma^2) offsets to each coordinate.
PointCloud gaussian_jitter(const PointCloud& cloud, double sigma, std::uint64_t seed);

/// ceil(fraction * n), with a 1e-9 allowance so that fraction = m / n yields m.
std::size_t outlier_count(double fraction, std::size_t n);

/// Moves outlier_count(fraction, n) distinct, uniformly chosen points by
/// `magnitude` along independent uniformly random unit directions.
PointCloud inject_outliers(const PointCloud& cloud, double fraction, double magnitude,
                           std::uint64_t seed);

/// Dispatches on spec.kind. Output clouds carry no normals; the precision of
/// the input is kept.
PointCloud apply_distortion(const PointCloud& cloud, const DistortionSpec& spec);

std::string distortion_spec_to_json(const DistortionSpec& spec);
DistortionSpec distortion_spec_from_json(const std::string& text);

}  // namespace ghpsnr
