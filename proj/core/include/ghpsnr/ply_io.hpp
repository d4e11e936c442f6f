#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ghpsnr/point_cloud.hpp"

namespace ghpsnr {

enum class PlyEncoding { Ascii, BinaryLittleEndian };

enum class PlyScalar { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

struct PlyProperty {
  std::string name;
  PlyScalar type = PlyScalar::Float64;
};

/// Column-major view of the "vertex" element of a PLY file. Every scalar is
/// widened to double; `properties[i]` describes `columns[i]`.
struct PlyVertexTable {
  std::vector<std::string> comments;
  std::vector<PlyProperty> properties;
  std::vector<std::vector<double>> columns;

  std::size_t size() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  /// Index of the named property, or -1.
  int find(const std::string& name) const noexcept;
};

/// Reads the vertex element of a PLY 1.0 file (ascii or binary_little_endian).
/// Any other element, list property or big-endian payload is rejected.
PlyVertexTable read_ply_vertices(const std::filesystem::path& path);

void write_ply_vertices(const std::filesystem::path& path, const PlyVertexTable& table,
                        PlyEncoding encoding);

/// Loads x/y/z (float or double) and optional nx/ny/nz, renormalizing normals.
/// A `comment precision_bits N` header line populates PointCloud::precision_bits.
PointCloud load_ply(const std::filesystem::path& path);

/// Writes coordinates (and normals, if any) as float64; ascii output uses the
/// shortest round-trip decimal form so both encodings reload bit-exactly.
void save_ply(const PointCloud& cloud, const std::filesystem::path& path,
              PlyEncoding encoding = PlyEncoding::BinaryLittleEndian);

}  // namespace ghpsnr
