#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ghpsnr/mos_table.hpp"

namespace ghpsnr {

/// Cubic mapping from an objective score y to predicted MOS:
/// a + b y + c y^2 + d y^3.
struct RegressionModel {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double operator()(double y) const noexcept { return a + y * (b + y * (c + y * d)); }
};

struct ScorePair {
  double y = 0.0;    // objective score
  double mos = 0.0;  // subjective score
};

/// Ordinary least squares on standardized y (zero mean, unit variance), then
/// mapped back to raw-y coefficients.
///
/// Throws ValidationError for fewer than 4 pairs or non-finite values and
/// NumericError when fewer than 4 distinct y values make the design rank
/// deficient.
RegressionModel fit_cubic(std::span<const ScorePair> pairs);

/// Sample Pearson correlation. Throws NumericError on zero variance.
double plcc(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation of average ranks.
double srocc(std::span<const double> x, std::span<const double> y);

/// Root mean squared residual mos - model(y).
double rmse(const RegressionModel& model, std::span<const ScorePair> pairs);

struct CorrelationReport {
  std::string metric_label;
  std::size_t n = 0;
  std::size_t excluded_infinite = 0;
  double plcc_raw = 0.0;
  double plcc_fitted = 0.0;
  double srocc = 0.0;
  double rmse = 0.0;
  RegressionModel model;
  /// Samples used, sorted by (y, mos).
  std::vector<ScorePair> samples;
};

/// Correlates one objective score column against MOS. Records whose score is
/// infinite are dropped and counted. Samples are put in canonical (y, mos)
/// order first, so record order never changes the result.
CorrelationReport evaluate_metric(const std::vector<MosRecord>& records,
                                  const std::string& metric_label);

/// Indices of `reports` ordered by descending plcc_fitted, ties by label.
std::vector<std::size_t> rank_by_plcc(const std::vector<CorrelationReport>& reports);

}  // namespace ghpsnr
