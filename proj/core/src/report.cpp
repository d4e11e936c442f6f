#include "ghpsnr/report.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include <json.hpp>

namespace ghpsnr {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json summary_json(const CloudSummary& c) {
  ordered_json j;
  j["name"] = c.name;
  j["points"] = c.points;
  j["normals"] = std::string(to_string(c.normals));
  return j;
}

ordered_json result_json(const QualityResult& r) {
  ordered_json j;
  j["kind"] = std::string(to_string(r.config.kind));
  j["reduction"] = std::string(to_string(r.config.reduction.kind));
  if (r.config.reduction.kind == ReductionKind::GeneralizedHausdorff) {
    j["per"] = r.config.reduction.per;
  } else {
    j["per"] = nullptr;
  }
  j["pooling"] = std::string(to_string(r.config.pooling));
  j["d_ab"] = r.directed_ab;
  j["d_ba"] = r.directed_ba;
  j["undirected"] = r.undirected;
  j["psnr_db"] = number_or_null(r.psnr_db);
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf;
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

std::string_view to_string(Direction d) {
  return d == Direction::OriginalToDecoded ? "ab" : "ba";
}

std::string quality_report_json(std::span<const QualityResult> results,
                                const QualityReportContext& context) {
  ordered_json j;
  j["original"] = summary_json(context.original);
  j["decoded"] = summary_json(context.decoded);
  j["signal_peak"] = context.signal_peak;
  if (context.normals_k) j["normals_k"] = *context.normals_k;
  if (context.timestamp) j["timestamp"] = *context.timestamp;
  ordered_json arr = ordered_json::array();
  for (const auto& r : results) arr.push_back(result_json(r));
  j["results"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string quality_report_csv(std::span<const QualityResult> results) {
  std::string out = "kind,reduction,per,pooling,d_ab,d_ba,undirected,psnr_db\n";
  for (const auto& r : results) {
    out += to_string(r.config.kind);
    out += ',';
    out += to_string(r.config.reduction.kind);
    out += ',';
    if (r.config.reduction.kind == ReductionKind::GeneralizedHausdorff) {
      out += format_number(r.config.reduction.per);
    }
    out += ',';
    out += to_string(r.config.pooling);
    out += ',' + format_number(r.directed_ab) + ',' + format_number(r.directed_ba) + ',' +
           format_number(r.undirected) + ',' + format_number(r.psnr_db) + '\n';
  }
  return out;
}

std::string profile_csv(std::span<const ProfileRow> rows) {
  std::string out = "direction,per,value\n";
  for (const auto& r : rows) {
    out += to_string(r.direction);
    out += ',' + format_number(r.per) + ',' + format_number(r.value) + '\n';
  }
  return out;
}

std::string correlation_report_json(std::span<const CorrelationReport> reports,
                                    const std::optional<std::vector<std::size_t>>& ranking,
                                    const std::optional<std::string>& timestamp) {
  ordered_json j;
  if (timestamp) j["timestamp"] = *timestamp;
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json e;
    e["metric_label"] = r.metric_label;
    e["n"] = r.n;
    e["excluded_infinite"] = r.excluded_infinite;
    e["plcc_raw"] = r.plcc_raw;
    e["plcc_fitted"] = r.plcc_fitted;
    e["srocc"] = r.srocc;
    e["rmse"] = r.rmse;
    e["model"] = {{"a", r.model.a}, {"b", r.model.b}, {"c", r.model.c}, {"d", r.model.d}};
    arr.push_back(std::move(e));
  }
  j["reports"] = std::move(arr);
  if (ranking) {
    ordered_json rank = ordered_json::array();
    for (std::size_t idx : *ranking) rank.push_back(reports[idx].metric_label);
    j["ranking"] = std::move(rank);
  }
  return j.dump(2) + "\n";
}

std::string correlation_report_csv(std::span<const CorrelationReport> reports) {
  std::string out = "metric_label,n,excluded_infinite,plcc_raw,plcc_fitted,srocc,rmse,a,b,c,d\n";
  for (const auto& r : reports) {
    out += csv_field(r.metric_label) + ',' + std::to_string(r.n) + ',' + std::to_string(r.excluded_infinite);
    for (double v : {r.plcc_raw, r.plcc_fitted, r.srocc, r.rmse, r.model.a, r.model.b, r.model.c, r.model.d}) {
      out += ',' + format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::string regression_csv(const CorrelationReport& report) {
  std::string out = "y,mos,mos_predicted\n";
  for (const auto& s : report.samples) {
    out += format_number(s.y) + ',' + format_number(s.mos) + ',' +
           format_number(report.model(s.y)) + '\n';
  }
  return out;
}

}  // namespace ghpsnr
