#include "ghpsnr/point_cloud.hpp"

#include <cmath>
#include <string>

#include "ghpsnr/errors.hpp"

namespace ghpsnr {

namespace {

bool finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

}  // namespace

PointCloud::PointCloud(std::string name, std::vector<Vec3> points,
                       std::optional<std::vector<Vec3>> normals,
                       std::optional<int> precision_bits)
    : name_(std::move(name)),
      points_(std::move(points)),
      normals_(std::move(normals)),
      precision_bits_(precision_bits) {
  if (points_.empty()) {
    throw ValidationError("point cloud '" + name_ + "' has no points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!finite(points_[i])) {
      throw ValidationError("point cloud '" + name_ + "': non-finite coordinate at point " +
                            std::to_string(i));
    }
  }
  if (normals_) {
    if (normals_->size() != points_.size()) {
      throw ValidationError("point cloud '" + name_ + "': " + std::to_string(normals_->size()) +
                            " normals for " + std::to_string(points_.size()) + " points");
    }
    for (std::size_t i = 0; i < normals_->size(); ++i) {
      const Vec3& n = (*normals_)[i];
      if (!finite(n) || std::abs(n.norm() - 1.0) > kNormalTolerance) {
        throw ValidationError("point cloud '" + name_ + "': normal " + std::to_string(i) +
                              " is not unit length");
      }
    }
  }
  if (precision_bits_ && (*precision_bits_ < 1 || *precision_bits_ > 52)) {
    throw ValidationError("point cloud '" + name_ + "': precision_bits out of range [1, 52]");
  }
}

std::optional<double> PointCloud::signal_peak() const noexcept {
  if (!precision_bits_) return std::nullopt;
  return peak_from_precision(*precision_bits_);
}

PointCloud PointCloud::with_normals(std::vector<Vec3> normals) const {
  return PointCloud(name_, points_, std::move(normals), precision_bits_);
}

PointCloud PointCloud::without_normals() const {
  return PointCloud(name_, points_, std::nullopt, precision_bits_);
}

PointCloud PointCloud::renamed(std::string name) const {
  return PointCloud(std::move(name), points_, normals_, precision_bits_);
}

double peak_from_precision(int bits) {
  if (bits < 1 || bits > 52) {
    throw ValidationError("precision bits must lie in [1, 52], got " + std::to_string(bits));
  }
  return std::ldexp(1.0, bits) - 1.0;
}

}  // namespace ghpsnr
