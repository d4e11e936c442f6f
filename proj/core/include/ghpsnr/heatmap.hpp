#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>

#include "ghpsnr/ply_io.hpp"
#include "ghpsnr/point_cloud.hpp"

namespace ghpsnr {

using Rgb = std::array<std::uint8_t, 3>;

/// Linear blue -> green -> red ramp over [0, max_error].
///
/// t = error / max_error (t = 0 when max_error is 0); t in [0, 0.5] blends
/// blue into green, t in [0.5, 1] blends green into red. Channels are rounded
/// to the nearest 8-bit value.
Rgb error_color(double error, double max_error);

/// Writes `cloud` as a PLY with uchar red/green/blue from error_color and the
/// raw per-point value as a double property named "error".
void export_error_heatmap(const PointCloud& cloud, std::span<const double> errors,
                          const std::filesystem::path& path,
                          PlyEncoding encoding = PlyEncoding::BinaryLittleEndian);

}  // namespace ghpsnr
