#include "ghpsnr/ply_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include "ghpsnr/errors.hpp"

namespace ghpsnr {

namespace {

constexpr std::string_view kPrecisionComment = "precision_bits";

struct ScalarInfo {
  std::string_view name;
  std::string_view alias;
  PlyScalar type;
  std::size_t bytes;
};

constexpr std::array<ScalarInfo, 8> kScalars{{
    {"char", "int8", PlyScalar::Int8, 1},
    {"uchar", "uint8", PlyScalar::UInt8, 1},
    {"short", "int16", PlyScalar::Int16, 2},
    {"ushort", "uint16", PlyScalar::UInt16, 2},
    {"int", "int32", PlyScalar::Int32, 4},
    {"uint", "uint32", PlyScalar::UInt32, 4},
    {"float", "float32", PlyScalar::Float32, 4},
    {"double", "float64", PlyScalar::Float64, 8},
}};

const ScalarInfo& info(PlyScalar t) {
  for (const auto& s : kScalars) {
    if (s.type == t) return s;
  }
  throw std::logic_error("unknown PLY scalar");
}

std::optional<PlyScalar> parse_scalar(std::string_view name) {
  for (const auto& s : kScalars) {
    if (name == s.name || name == s.alias) return s.type;
  }
  return std::nullopt;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

template <typename T>
T load_le(const char* p) {
  std::array<char, sizeof(T)> buf;
  std::memcpy(buf.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf.begin(), buf.end());
  }
  T v;
  std::memcpy(&v, buf.data(), sizeof(T));
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  std::array<char, sizeof(T)> buf;
  std::memcpy(buf.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf.begin(), buf.end());
  }
  out.append(buf.data(), buf.size());
}

double decode_binary(PlyScalar t, const char* p) {
  switch (t) {
    case PlyScalar::Int8: return load_le<std::int8_t>(p);
    case PlyScalar::UInt8: return load_le<std::uint8_t>(p);
    case PlyScalar::Int16: return load_le<std::int16_t>(p);
    case PlyScalar::UInt16: return load_le<std::uint16_t>(p);
    case PlyScalar::Int32: return load_le<std::int32_t>(p);
    case PlyScalar::UInt32: return load_le<std::uint32_t>(p);
    case PlyScalar::Float32: return load_le<float>(p);
    case PlyScalar::Float64: return load_le<double>(p);
  }
  return 0.0;
}

void encode_binary(std::string& out, PlyScalar t, double v) {
  switch (t) {
    case PlyScalar::Int8: store_le(out, static_cast<std::int8_t>(v)); break;
    case PlyScalar::UInt8: store_le(out, static_cast<std::uint8_t>(v)); break;
    case PlyScalar::Int16: store_le(out, static_cast<std::int16_t>(v)); break;
    case PlyScalar::UInt16: store_le(out, static_cast<std::uint16_t>(v)); break;
    case PlyScalar::Int32: store_le(out, static_cast<std::int32_t>(v)); break;
    case PlyScalar::UInt32: store_le(out, static_cast<std::uint32_t>(v)); break;
    case PlyScalar::Float32: store_le(out, static_cast<float>(v)); break;
    case PlyScalar::Float64: store_le(out, v); break;
  }
}

void encode_ascii(std::string& out, PlyScalar t, double v) {
  std::array<char, 64> buf;
  std::to_chars_result r;
  switch (t) {
    case PlyScalar::Float32: r = std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(v)); break;
    case PlyScalar::Float64: r = std::to_chars(buf.data(), buf.data() + buf.size(), v); break;
    default:
      r = std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<long long>(v));
      break;
  }
  out.append(buf.data(), r.ptr);
}

double parse_ascii_value(std::string_view tok, const std::filesystem::path& path) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw IoError(path.string() + ": malformed ascii value '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

int PlyVertexTable::find(const std::string& name) const noexcept {
  for (std::size_t i = 0; i < properties.size(); ++i) {
    if (properties[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

PlyVertexTable read_ply_vertices(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  auto fail = [&](const std::string& what) -> IoError {
    return IoError(path.string() + ": " + what);
  };

  std::string line;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") throw fail("missing 'ply' magic");

  std::optional<PlyEncoding> encoding;
  std::optional<std::size_t> vertex_count;
  bool in_vertex = false;
  bool ended = false;
  PlyVertexTable table;

  while (next_line()) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    if (key == "end_header") {
      ended = true;
      break;
    }
    if (key == "comment") {
      const auto pos = line.find("comment");
      std::string text = line.substr(pos + 7);
      if (!text.empty() && text.front() == ' ') text.erase(0, 1);
      table.comments.push_back(std::move(text));
    } else if (key == "obj_info") {
      continue;
    } else if (key == "format") {
      if (tok.size() != 3 || tok[2] != "1.0") throw fail("malformed format line");
      if (tok[1] == "ascii") {
        encoding = PlyEncoding::Ascii;
      } else if (tok[1] == "binary_little_endian") {
        encoding = PlyEncoding::BinaryLittleEndian;
      } else {
        throw fail("unsupported encoding '" + tok[1] + "'");
      }
    } else if (key == "element") {
      if (tok.size() != 3) throw fail("malformed element line");
      if (tok[1] != "vertex") throw fail("unsupported element '" + tok[1] + "'");
      if (vertex_count) throw fail("duplicate vertex element");
      std::size_t n = 0;
      const auto [ptr, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), n);
      if (ec != std::errc() || ptr != tok[2].data() + tok[2].size()) {
        throw fail("malformed vertex count '" + tok[2] + "'");
      }
      vertex_count = n;
      in_vertex = true;
    } else if (key == "property") {
      if (!in_vertex) throw fail("property outside of an element");
      if (tok.size() >= 2 && tok[1] == "list") throw fail("list properties are not supported");
      if (tok.size() != 3) throw fail("malformed property line");
      const auto type = parse_scalar(tok[1]);
      if (!type) throw fail("unsupported property type '" + tok[1] + "'");
      if (table.find(tok[2]) >= 0) throw fail("duplicate property '" + tok[2] + "'");
      table.properties.push_back({tok[2], *type});
    } else {
      throw fail("unexpected header line '" + line + "'");
    }
  }

  if (!ended) throw fail("missing end_header");
  if (!encoding) throw fail("missing format line");
  if (!vertex_count) throw fail("missing vertex element");
  if (table.properties.empty()) throw fail("vertex element declares no properties");

  const std::size_t n = *vertex_count;
  const std::size_t np = table.properties.size();
  table.columns.assign(np, std::vector<double>(n));

  if (*encoding == PlyEncoding::Ascii) {
    for (std::size_t i = 0; i < n; ++i) {
      std::string tokn;
      for (std::size_t j = 0; j < np; ++j) {
        if (!(in >> tokn)) throw fail("truncated ascii body at vertex " + std::to_string(i));
        const double v = parse_ascii_value(tokn, path);
        // A float property holds what a float can hold, as in binary files.
        table.columns[j][i] =
            table.properties[j].type == PlyScalar::Float32 ? static_cast<double>(static_cast<float>(v)) : v;
      }
    }
  } else {
    std::size_t stride = 0;
    for (const auto& p : table.properties) stride += info(p.type).bytes;
    std::vector<char> buf(stride);
    for (std::size_t i = 0; i < n; ++i) {
      if (!in.read(buf.data(), static_cast<std::streamsize>(stride))) {
        throw fail("truncated binary body at vertex " + std::to_string(i));
      }
      const char* p = buf.data();
      for (std::size_t j = 0; j < np; ++j) {
        table.columns[j][i] = decode_binary(table.properties[j].type, p);
        p += info(table.properties[j].type).bytes;
      }
    }
  }
  return table;
}

void write_ply_vertices(const std::filesystem::path& path, const PlyVertexTable& table,
                        PlyEncoding encoding) {
  if (table.columns.size() != table.properties.size()) {
    throw std::invalid_argument("PLY table: one column per property required");
  }
  const std::size_t n = table.size();
  for (const auto& c : table.columns) {
    if (c.size() != n) throw std::invalid_argument("PLY table: ragged columns");
  }

  std::string out;
  out += "ply\n";
  out += encoding == PlyEncoding::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  for (const auto& c : table.comments) out += "comment " + c + "\n";
  out += "element vertex " + std::to_string(n) + "\n";
  for (const auto& p : table.properties) {
    out += "property ";
    out += info(p.type).name;
    out += " " + p.name + "\n";
  }
  out += "end_header\n";

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < table.properties.size(); ++j) {
      if (encoding == PlyEncoding::Ascii) {
        if (j) out += ' ';
        encode_ascii(out, table.properties[j].type, table.columns[j][i]);
      } else {
        encode_binary(out, table.properties[j].type, table.columns[j][i]);
      }
    }
    if (encoding == PlyEncoding::Ascii) out += '\n';
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

PointCloud load_ply(const std::filesystem::path& path) {
  const PlyVertexTable t = read_ply_vertices(path);
  if (t.size() == 0) throw ValidationError(path.string() + ": zero vertices");

  auto column = [&](const char* name, bool required) -> const std::vector<double>* {
    const int idx = t.find(name);
    if (idx < 0) {
      if (required) throw IoError(path.string() + ": missing vertex property '" + name + "'");
      return nullptr;
    }
    const PlyScalar type = t.properties[static_cast<std::size_t>(idx)].type;
    if (type != PlyScalar::Float32 && type != PlyScalar::Float64) {
      throw IoError(path.string() + ": property '" + name + "' must be float or double");
    }
    return &t.columns[static_cast<std::size_t>(idx)];
  };

  const auto* x = column("x", true);
  const auto* y = column("y", true);
  const auto* z = column("z", true);
  const auto* nx = column("nx", false);
  const auto* ny = column("ny", false);
  const auto* nz = column("nz", false);
  const int normal_count = (nx != nullptr) + (ny != nullptr) + (nz != nullptr);
  if (normal_count != 0 && normal_count != 3) {
    throw IoError(path.string() + ": normals need all of nx, ny, nz");
  }

  const std::size_t n = t.size();
  std::vector<Vec3> points(n);
  for (std::size_t i = 0; i < n; ++i) points[i] = Vec3((*x)[i], (*y)[i], (*z)[i]);

  std::optional<std::vector<Vec3>> normals;
  if (normal_count == 3) {
    normals.emplace(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 v((*nx)[i], (*ny)[i], (*nz)[i]);
      const double len = v.norm();
      if (!(len > 0.0) || !std::isfinite(len)) {
        throw ValidationError(path.string() + ": zero-length or non-finite normal at vertex " +
                              std::to_string(i));
      }
      // Already-unit normals are kept bit for bit so save/load round-trips.
      (*normals)[i] = std::abs(len - 1.0) <= 1e-12 ? v : Vec3(v / len);
    }
  }

  std::optional<int> precision;
  for (const auto& c : t.comments) {
    const auto tok = split_ws(c);
    if (tok.size() == 2 && tok[0] == kPrecisionComment) {
      int bits = 0;
      const auto [ptr, ec] = std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), bits);
      if (ec != std::errc() || ptr != tok[1].data() + tok[1].size()) {
        throw IoError(path.string() + ": malformed precision_bits comment");
      }
      precision = bits;
    }
  }

  return PointCloud(path.stem().string(), std::move(points), std::move(normals), precision);
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyEncoding encoding) {
  PlyVertexTable t;
  t.comments.push_back("generated by ghpsnr");
  if (cloud.precision_bits()) {
    t.comments.push_back(std::string(kPrecisionComment) + " " +
                         std::to_string(*cloud.precision_bits()));
  }
  const std::size_t n = cloud.size();
  auto add = [&](const char* name, const std::vector<Vec3>& src, int axis) {
    t.properties.push_back({name, PlyScalar::Float64});
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = src[i][axis];
    t.columns.push_back(std::move(col));
  };
  add("x", cloud.points(), 0);
  add("y", cloud.points(), 1);
  add("z", cloud.points(), 2);
  if (cloud.has_normals()) {
    add("nx", cloud.normals(), 0);
    add("ny", cloud.normals(), 1);
    add("nz", cloud.normals(), 2);
  }
  write_ply_vertices(path, t, encoding);
}

}  // namespace ghpsnr
