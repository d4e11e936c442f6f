#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghpsnr/correlation.hpp"
#include "ghpsnr/geometry_metrics.hpp"

namespace ghpsnr {

// Text serializations of results. JSON is the primary format; the CSV forms
// mirror it one row per result. Infinite PSNR is `null` in JSON and `inf` in
// CSV. Numbers are written in shortest round-trip form.

struct CloudSummary {
  std::string name;
  std::size_t points = 0;
  NormalSource normals = NormalSource::None;
};

struct QualityReportContext {
  CloudSummary original;
  CloudSummary decoded;
  double signal_peak = 1.0;
  std::optional<std::size_t> normals_k;   // set when any normals were estimated
  std::optional<std::string> timestamp;
};

std::string quality_report_json(std::span<const QualityResult> results,
                                const QualityReportContext& context);
std::string quality_report_csv(std::span<const QualityResult> results);

struct ProfileRow {
  Direction direction = Direction::OriginalToDecoded;
  double per = 0.0;
  double value = 0.0;
};

std::string_view to_string(Direction d);

/// Header `direction,per,value`, one row per entry.
std::string profile_csv(std::span<const ProfileRow> rows);

/// {"reports": [...], "ranking": [...]}; ranking present only when requested.
std::string correlation_report_json(std::span<const CorrelationReport> reports,
                                    const std::optional<std::vector<std::size_t>>& ranking,
                                    const std::optional<std::string>& timestamp = std::nullopt);

/// One row per report: label, counts, correlations and model coefficients.
std::string correlation_report_csv(std::span<const CorrelationReport> reports);

/// Header `y,mos,mos_predicted`, samples in canonical order.
std::string regression_csv(const CorrelationReport& report);

/// Shortest round-trip decimal; `inf`/`-inf`/`nan` for non-finite values.
std::string format_number(double v);

}  // namespace ghpsnr
