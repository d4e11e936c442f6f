#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghpsnr/normal_estimation.hpp"
#include "ghpsnr/point_cloud.hpp"
#include "ghpsnr/spatial_index.hpp"

namespace ghpsnr {

// All distances in this module are squared Euclidean distances in model units.

enum class DistanceKind { PointToPoint, PointToPlane };
enum class ReductionKind { Mse, GeneralizedHausdorff };
enum class Pooling { Min, Max, Avg, WAvg };

inline constexpr std::array<Pooling, 4> kAllPoolings{Pooling::Min, Pooling::Max, Pooling::Avg,
                                                     Pooling::WAvg};
inline constexpr std::array<DistanceKind, 2> kAllKinds{DistanceKind::PointToPoint,
                                                       DistanceKind::PointToPlane};

/// How a directed error set collapses to one number: the mean, or the K-th
/// ranked value with K derived from a percentage of the set size.
struct Reduction {
  ReductionKind kind = ReductionKind::Mse;
  double per = 100.0;  // only meaningful for GeneralizedHausdorff

  static Reduction mse() { return {ReductionKind::Mse, 100.0}; }
  static Reduction gh(double per) { return {ReductionKind::GeneralizedHausdorff, per}; }
  static Reduction hausdorff() { return gh(100.0); }

  friend bool operator==(const Reduction&, const Reduction&) = default;
};

struct MetricConfig {
  DistanceKind kind = DistanceKind::PointToPoint;
  Reduction reduction = Reduction::mse();
  Pooling pooling = Pooling::Max;
  double signal_peak = 1.0;

  /// Throws ValidationError unless per is in (0, 100] and the peak is positive.
  void validate() const;

  /// MPEG D1: point-to-point MSE, max pooling.
  static MetricConfig d1(double peak) { return {DistanceKind::PointToPoint, Reduction::mse(), Pooling::Max, peak}; }
  /// MPEG D2: point-to-plane MSE, max pooling.
  static MetricConfig d2(double peak) { return {DistanceKind::PointToPlane, Reduction::mse(), Pooling::Max, peak}; }

  friend bool operator==(const MetricConfig&, const MetricConfig&) = default;
};

std::string_view to_string(DistanceKind kind);
std::string_view to_string(ReductionKind kind);
std::string_view to_string(Pooling pooling);
std::optional<DistanceKind> parse_distance_kind(std::string_view s);
std::optional<ReductionKind> parse_reduction_kind(std::string_view s);
std::optional<Pooling> parse_pooling(std::string_view s);

/// Per-point squared errors from a query cloud toward a reference cloud,
/// sorted ascending. Construction validates (non-negative, finite) and sorts.
class DirectedErrorSet {
 public:
  explicit DirectedErrorSet(std::vector<double> errors);

  std::span<const double> errors() const noexcept { return errors_; }
  std::size_t source_size() const noexcept { return errors_.size(); }
  double min() const noexcept { return errors_.front(); }
  double max() const noexcept { return errors_.back(); }

 private:
  std::vector<double> errors_;
};

/// Per-point errors in query point order (unsorted).
///
/// Point-to-point: ||a - b||^2 with b the nearest reference point.
/// Point-to-plane: ((a - b) . n_b)^2 with n_b the reference normal at b.
std::vector<double> per_point_errors(const PointCloud& query, const PointCloud& reference,
                                     DistanceKind kind, const SpatialIndex& reference_index);

DirectedErrorSet directed_errors(const PointCloud& query, const PointCloud& reference,
                                 DistanceKind kind, const SpatialIndex& reference_index);

/// Mean of the set, summed pairwise over the sorted values.
double reduce_mse(const DirectedErrorSet& s);

/// K = round(per * n / 100), half away from zero, clamped to [1, n].
std::size_t rank_from_per(double per, std::size_t n);

/// K-th smallest error (1-based), K = rank_from_per(per, source_size).
double reduce_gh(const DirectedErrorSet& s, double per);

double reduce(const DirectedErrorSet& s, const Reduction& r);

double pool(double d_ab, double d_ba, Pooling pooling, std::size_t n_a, std::size_t n_b);

/// 10 log10(3 p^2 / d); +infinity when d == 0.
double psnr(double undirected, double peak);

struct QualityResult {
  double directed_ab = 0.0;  // original -> decoded
  double directed_ba = 0.0;  // decoded -> original
  double undirected = 0.0;
  double psnr_db = 0.0;      // may be +infinity
  MetricConfig config;
};

/// Percentages evaluated by default: 100/n (the minimum) followed by
/// 50, 60, 65, ..., 95, 96, 97, 98, 99, 100.
std::vector<double> default_per_grid(std::size_t n);

struct ProfilePoint {
  double per = 0.0;
  double value = 0.0;
};

std::vector<ProfilePoint> distance_profile(const DirectedErrorSet& s, std::span<const double> per_grid);

enum class Direction { OriginalToDecoded, DecodedToOriginal };

enum class NormalSource { None, File, Estimated };
std::string_view to_string(NormalSource s);

struct MetricOptions {
  std::size_t normals_k = kDefaultNormalNeighbors;
};

/// An (original, decoded) pair with both spatial indices built once and the
/// directed error sets materialized lazily and cached per distance kind.
///
/// Point-to-plane errors in each direction use the normals of that
/// direction's reference cloud; missing normals are estimated on first use
/// with MetricOptions::normals_k neighbours.
class CloudPair {
 public:
  CloudPair(PointCloud original, PointCloud decoded, MetricOptions options = {});
  ~CloudPair();
  CloudPair(CloudPair&&) noexcept;
  CloudPair& operator=(CloudPair&&) noexcept;

  const PointCloud& original() const noexcept;
  const PointCloud& decoded() const noexcept;

  const DirectedErrorSet& errors(DistanceKind kind, Direction dir);
  /// Per-point errors of the query cloud of `dir`, in point order.
  const std::vector<double>& point_errors(DistanceKind kind, Direction dir);

  QualityResult evaluate(const MetricConfig& config);

  /// One result per (kind, per, pooling) plus an MSE/max baseline per kind,
  /// ordered kind-major; within a kind the baseline comes first, then per in
  /// list order with poolings in Min, Max, Avg, WAvg order.
  std::vector<QualityResult> grid(std::span<const DistanceKind> kinds,
                                  std::span<const double> per_list,
                                  std::span<const Pooling> poolings, double peak);

  NormalSource original_normals() const noexcept;
  NormalSource decoded_normals() const noexcept;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

QualityResult compute_metric(const PointCloud& original, const PointCloud& decoded,
                             const MetricConfig& config, const MetricOptions& options = {});

std::vector<QualityResult> metric_grid(const PointCloud& original, const PointCloud& decoded,
                                       std::span<const DistanceKind> kinds,
                                       std::span<const double> per_list,
                                       std::span<const Pooling> poolings, double peak,
                                       const MetricOptions& options = {});

}  // namespace ghpsnr
