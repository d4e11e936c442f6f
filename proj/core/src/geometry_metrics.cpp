#include "ghpsnr/geometry_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "ghpsnr/errors.hpp"

namespace ghpsnr {

namespace {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void check_per(double per) {
  if (!(per > 0.0 && per <= 100.0)) {
    throw ValidationError("per must lie in (0, 100], got " + std::to_string(per));
  }
}

}  // namespace

void MetricConfig::validate() const {
  if (reduction.kind == ReductionKind::GeneralizedHausdorff) check_per(reduction.per);
  if (!(signal_peak > 0.0) || !std::isfinite(signal_peak)) {
    throw ValidationError("signal peak must be positive and finite");
  }
}

std::string_view to_string(DistanceKind kind) {
  return kind == DistanceKind::PointToPoint ? "p2po" : "p2pl";
}

std::string_view to_string(ReductionKind kind) {
  return kind == ReductionKind::Mse ? "mse" : "gh";
}

std::string_view to_string(Pooling pooling) {
  switch (pooling) {
    case Pooling::Min: return "min";
    case Pooling::Max: return "max";
    case Pooling::Avg: return "avg";
    case Pooling::WAvg: return "wavg";
  }
  return "?";
}

std::string_view to_string(NormalSource s) {
  switch (s) {
    case NormalSource::None: return "none";
    case NormalSource::File: return "file";
    case NormalSource::Estimated: return "estimated";
  }
  return "?";
}

std::optional<DistanceKind> parse_distance_kind(std::string_view s) {
  if (s == "p2po" || s == "d1") return DistanceKind::PointToPoint;
  if (s == "p2pl" || s == "d2") return DistanceKind::PointToPlane;
  return std::nullopt;
}

std::optional<ReductionKind> parse_reduction_kind(std::string_view s) {
  if (s == "mse") return ReductionKind::Mse;
  if (s == "gh") return ReductionKind::GeneralizedHausdorff;
  return std::nullopt;
}

std::optional<Pooling> parse_pooling(std::string_view s) {
  for (Pooling p : kAllPoolings) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

DirectedErrorSet::DirectedErrorSet(std::vector<double> errors) : errors_(std::move(errors)) {
  if (errors_.empty()) throw ValidationError("directed error set is empty");
  for (double e : errors_) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw ValidationError("directed error set holds a negative or non-finite value");
    }
  }
  std::sort(errors_.begin(), errors_.end());
}

std::vector<double> per_point_errors(const PointCloud& query, const PointCloud& reference,
                                     DistanceKind kind, const SpatialIndex& reference_index) {
  if (reference_index.size() != reference.size()) {
    throw ValidationError("reference index does not match the reference cloud");
  }
  if (kind == DistanceKind::PointToPlane && !reference.has_normals()) {
    throw ValidationError("point-to-plane distance requires normals on reference cloud '" +
                          reference.name() + "'");
  }
  const auto& q = query.points();
  const auto& ref = reference.points();
  const auto n = static_cast<std::ptrdiff_t>(q.size());
  std::vector<double> out(q.size());

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Vec3& a = q[static_cast<std::size_t>(i)];
    const Neighbor nb = reference_index.nearest(a);
    if (kind == DistanceKind::PointToPoint) {
      out[static_cast<std::size_t>(i)] = nb.squared_distance;
    } else {
      const Vec3& b = ref[nb.index];
      const Vec3& nrm = reference.normals()[nb.index];
      const double proj = (a.x() - b.x()) * nrm.x() + (a.y() - b.y()) * nrm.y() +
                          (a.z() - b.z()) * nrm.z();
      // (e.n)^2 <= |e|^2 for a unit normal; the min removes rounding excess.
      out[static_cast<std::size_t>(i)] = std::min(proj * proj, nb.squared_distance);
    }
  }
  return out;
}

DirectedErrorSet directed_errors(const PointCloud& query, const PointCloud& reference,
                                 DistanceKind kind, const SpatialIndex& reference_index) {
  return DirectedErrorSet(per_point_errors(query, reference, kind, reference_index));
}

double reduce_mse(const DirectedErrorSet& s) {
  return pairwise_sum(s.errors()) / static_cast<double>(s.source_size());
}

std::size_t rank_from_per(double per, std::size_t n) {
  check_per(per);
  if (n == 0) throw ValidationError("rank_from_per: empty set");
  const double k = std::round(per * static_cast<double>(n) / 100.0);
  if (k < 1.0) return 1;
  if (k > static_cast<double>(n)) return n;
  return static_cast<std::size_t>(k);
}

double reduce_gh(const DirectedErrorSet& s, double per) {
  return s.errors()[rank_from_per(per, s.source_size()) - 1];
}

double reduce(const DirectedErrorSet& s, const Reduction& r) {
  return r.kind == ReductionKind::Mse ? reduce_mse(s) : reduce_gh(s, r.per);
}

double pool(double d_ab, double d_ba, Pooling pooling, std::size_t n_a, std::size_t n_b) {
  if (!(d_ab >= 0.0) || !(d_ba >= 0.0)) throw ValidationError("pool: negative distance");
  if (n_a == 0 || n_b == 0) throw ValidationError("pool: empty cloud size");
  switch (pooling) {
    case Pooling::Min: return std::min(d_ab, d_ba);
    case Pooling::Max: return std::max(d_ab, d_ba);
    case Pooling::Avg: return (d_ab + d_ba) / 2.0;
    case Pooling::WAvg: {
      if (n_a == n_b) return (d_ab + d_ba) / 2.0;
      const double wa = static_cast<double>(n_a);
      const double wb = static_cast<double>(n_b);
      // A convex combination can round outside [min, max]; clamp it back.
      const double v = (wa * d_ab + wb * d_ba) / (wa + wb);
      return std::clamp(v, std::min(d_ab, d_ba), std::max(d_ab, d_ba));
    }
  }
  return 0.0;
}

double psnr(double undirected, double peak) {
  if (!(undirected >= 0.0)) throw ValidationError("psnr: negative distance");
  if (!(peak > 0.0)) throw ValidationError("psnr: signal peak must be positive");
  if (undirected == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(3.0 * peak * peak / undirected);
}

std::vector<double> default_per_grid(std::size_t n) {
  if (n == 0) throw ValidationError("default_per_grid: empty cloud");
  return {100.0 / static_cast<double>(n), 50, 60, 65, 70, 75, 80, 85, 90, 95, 96, 97, 98, 99, 100};
}

std::vector<ProfilePoint> distance_profile(const DirectedErrorSet& s, std::span<const double> per_grid) {
  std::vector<ProfilePoint> out;
  out.reserve(per_grid.size());
  for (double per : per_grid) out.push_back({per, reduce_gh(s, per)});
  return out;
}

struct CloudPair::State {
  PointCloud original;
  PointCloud decoded;
  MetricOptions options;
  SpatialIndex original_index;
  SpatialIndex decoded_index;
  NormalSource original_normals;
  NormalSource decoded_normals;
  std::map<std::pair<DistanceKind, Direction>, std::vector<double>> point_errors;
  std::map<std::pair<DistanceKind, Direction>, DirectedErrorSet> sets;

  State(PointCloud o, PointCloud d, MetricOptions opt)
      : original(std::move(o)),
        decoded(std::move(d)),
        options(opt),
        original_index(original),
        decoded_index(decoded),
        original_normals(original.has_normals() ? NormalSource::File : NormalSource::None),
        decoded_normals(decoded.has_normals() ? NormalSource::File : NormalSource::None) {}

  void ensure_normals(PointCloud& cloud, const SpatialIndex& index, NormalSource& source) {
    if (cloud.has_normals()) return;
    cloud = estimate_normals(cloud, index, options.normals_k);
    source = NormalSource::Estimated;
  }
};

CloudPair::CloudPair(PointCloud original, PointCloud decoded, MetricOptions options)
    : state_(std::make_unique<State>(std::move(original), std::move(decoded), options)) {}
CloudPair::~CloudPair() = default;
CloudPair::CloudPair(CloudPair&&) noexcept = default;
CloudPair& CloudPair::operator=(CloudPair&&) noexcept = default;

const PointCloud& CloudPair::original() const noexcept { return state_->original; }
const PointCloud& CloudPair::decoded() const noexcept { return state_->decoded; }
NormalSource CloudPair::original_normals() const noexcept { return state_->original_normals; }
NormalSource CloudPair::decoded_normals() const noexcept { return state_->decoded_normals; }

const std::vector<double>& CloudPair::point_errors(DistanceKind kind, Direction dir) {
  State& s = *state_;
  const auto key = std::make_pair(kind, dir);
  if (auto it = s.point_errors.find(key); it != s.point_errors.end()) return it->second;

  const bool forward = dir == Direction::OriginalToDecoded;
  if (kind == DistanceKind::PointToPlane) {
    if (forward) {
      s.ensure_normals(s.decoded, s.decoded_index, s.decoded_normals);
    } else {
      s.ensure_normals(s.original, s.original_index, s.original_normals);
    }
  }
  auto errs = forward ? per_point_errors(s.original, s.decoded, kind, s.decoded_index)
                      : per_point_errors(s.decoded, s.original, kind, s.original_index);
  return s.point_errors.emplace(key, std::move(errs)).first->second;
}

const DirectedErrorSet& CloudPair::errors(DistanceKind kind, Direction dir) {
  State& s = *state_;
  const auto key = std::make_pair(kind, dir);
  if (auto it = s.sets.find(key); it != s.sets.end()) return it->second;
  return s.sets.emplace(key, DirectedErrorSet(point_errors(kind, dir))).first->second;
}

QualityResult CloudPair::evaluate(const MetricConfig& config) {
  config.validate();
  QualityResult r;
  r.config = config;
  r.directed_ab = reduce(errors(config.kind, Direction::OriginalToDecoded), config.reduction);
  r.directed_ba = reduce(errors(config.kind, Direction::DecodedToOriginal), config.reduction);
  r.undirected = pool(r.directed_ab, r.directed_ba, config.pooling, state_->original.size(),
                      state_->decoded.size());
  r.psnr_db = psnr(r.undirected, config.signal_peak);
  return r;
}

std::vector<QualityResult> CloudPair::grid(std::span<const DistanceKind> kinds,
                                           std::span<const double> per_list,
                                           std::span<const Pooling> poolings, double peak) {
  if (per_list.empty()) throw ValidationError("metric grid: empty per list");
  if (kinds.empty() || poolings.empty()) throw ValidationError("metric grid: empty kind or pooling list");
  std::vector<QualityResult> out;
  out.reserve(kinds.size() * (per_list.size() * poolings.size() + 1));
  for (DistanceKind kind : kinds) {
    out.push_back(evaluate({kind, Reduction::mse(), Pooling::Max, peak}));
    for (double per : per_list) {
      for (Pooling p : poolings) out.push_back(evaluate({kind, Reduction::gh(per), p, peak}));
    }
  }
  return out;
}

QualityResult compute_metric(const PointCloud& original, const PointCloud& decoded,
                             const MetricConfig& config, const MetricOptions& options) {
  config.validate();
  CloudPair pair(original, decoded, options);
  return pair.evaluate(config);
}

std::vector<QualityResult> metric_grid(const PointCloud& original, const PointCloud& decoded,
                                       std::span<const DistanceKind> kinds,
                                       std::span<const double> per_list,
                                       std::span<const Pooling> poolings, double peak,
                                       const MetricOptions& options) {
  CloudPair pair(original, decoded, options);
  return pair.grid(kinds, per_list, poolings, peak);
}

}  // namespace ghpsnr
