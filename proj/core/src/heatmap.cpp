#include "ghpsnr/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ghpsnr/errors.hpp"

namespace ghpsnr {

namespace {

std::uint8_t channel(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Rgb error_color(double error, double max_error) {
  const double t = max_error > 0.0 ? std::clamp(error / max_error, 0.0, 1.0) : 0.0;
  if (t <= 0.5) {
    return {channel(0.0), channel(2.0 * t), channel(1.0 - 2.0 * t)};
  }
  return {channel(2.0 * t - 1.0), channel(2.0 - 2.0 * t), channel(0.0)};
}

void export_error_heatmap(const PointCloud& cloud, std::span<const double> errors,
                          const std::filesystem::path& path, PlyEncoding encoding) {
  if (errors.size() != cloud.size()) {
    throw ValidationError("heatmap: " + std::to_string(errors.size()) + " errors for " +
                          std::to_string(cloud.size()) + " points");
  }
  double max_error = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] >= 0.0) || !std::isfinite(errors[i])) {
      throw ValidationError("heatmap: error at point " + std::to_string(i) +
                            " is negative or non-finite");
    }
    max_error = std::max(max_error, errors[i]);
  }

  const std::size_t n = cloud.size();
  PlyVertexTable t;
  t.comments.push_back("generated by ghpsnr (error heatmap)");
  t.comments.push_back("colormap blue-green-red linear over [0, " + std::to_string(max_error) + "]");
  for (const char* axis : {"x", "y", "z"}) t.properties.push_back({axis, PlyScalar::Float64});
  for (const char* c : {"red", "green", "blue"}) t.properties.push_back({c, PlyScalar::UInt8});
  t.properties.push_back({"error", PlyScalar::Float64});
  t.columns.assign(t.properties.size(), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = cloud.point(i);
    const Rgb rgb = error_color(errors[i], max_error);
    for (int a = 0; a < 3; ++a) {
      t.columns[static_cast<std::size_t>(a)][i] = p[a];
      t.columns[static_cast<std::size_t>(3 + a)][i] = rgb[static_cast<std::size_t>(a)];
    }
    t.columns[6][i] = errors[i];
  }
  write_ply_vertices(path, t, encoding);
}

}  // namespace ghpsnr
