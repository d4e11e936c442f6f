#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <random>
#include <sstream>

#include "ghpsnr/report.hpp"
#include "support/oracles.hpp"

using namespace ghpsnr;
namespace gt = ghpsnr::testing;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("format_number round-trips and spells non-finite values") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.0) == "3");
  CHECK(format_number(INFINITY) == "inf");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(format_number(NAN) == "nan");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("quality report JSON layout") {
  std::mt19937_64 rng(2);
  const PointCloud a("orig", gt::random_points(rng, 300, 10));
  const PointCloud b = a.renamed("copy");
  const std::vector<QualityResult> results{
      compute_metric(a, b, MetricConfig::d1(1023)),
      compute_metric(a, gt::random_cloud(rng, 200, 10, false, "other"),
                     {DistanceKind::PointToPoint, Reduction::gh(95), Pooling::WAvg, 1023}),
  };
  QualityReportContext ctx{{"orig", 300, NormalSource::None}, {"copy", 300, NormalSource::Estimated}, 1023, 12,
                           "2026-01-01T00:00:00Z"};
  const auto j = nlohmann::json::parse(quality_report_json(results, ctx));
  CHECK(j["original"]["name"] == "orig");
  CHECK(j["original"]["points"] == 300);
  CHECK(j["original"]["normals"] == "none");
  CHECK(j["decoded"]["normals"] == "estimated");
  CHECK(j["signal_peak"] == 1023.0);
  CHECK(j["normals_k"] == 12);
  CHECK(j["timestamp"] == "2026-01-01T00:00:00Z");
  REQUIRE(j["results"].size() == 2);
  const auto& r0 = j["results"][0];
  CHECK(r0["kind"] == "p2po");
  CHECK(r0["reduction"] == "mse");
  CHECK(r0["per"].is_null());
  CHECK(r0["pooling"] == "max");
  CHECK(r0["undirected"] == 0.0);
  CHECK(r0["psnr_db"].is_null());
  const auto& r1 = j["results"][1];
  CHECK(r1["reduction"] == "gh");
  CHECK(r1["per"] == 95.0);
  CHECK(r1["pooling"] == "wavg");
  CHECK(r1["d_ab"].get<double>() == results[1].directed_ab);
  CHECK(r1["d_ba"].get<double>() == results[1].directed_ba);
  CHECK(r1["psnr_db"].get<double>() == results[1].psnr_db);

  ctx.normals_k.reset();
  ctx.timestamp.reset();
  const auto j2 = nlohmann::json::parse(quality_report_json(results, ctx));
  CHECK_FALSE(j2.contains("normals_k"));
  CHECK_FALSE(j2.contains("timestamp"));
}

TEST_CASE("quality report CSV mirrors the JSON rows") {
  QualityResult r;
  r.config = MetricConfig::d2(255);
  r.psnr_db = INFINITY;
  QualityResult g;
  g.config = {DistanceKind::PointToPoint, Reduction::gh(97.5), Pooling::Avg, 255};
  g.directed_ab = 0.25;
  g.directed_ba = 0.5;
  g.undirected = 0.375;
  g.psnr_db = 10.0;
  const auto l = lines(quality_report_csv(std::vector<QualityResult>{r, g}));
  REQUIRE(l.size() == 3);
  CHECK(l[0] == "kind,reduction,per,pooling,d_ab,d_ba,undirected,psnr_db");
  CHECK(l[1] == "p2pl,mse,,max,0,0,0,inf");
  CHECK(l[2] == "p2po,gh,97.5,avg,0.25,0.5,0.375,10");
}

TEST_CASE("profile CSV") {
  const std::vector<ProfileRow> rows{{Direction::OriginalToDecoded, 50, 0.5},
                                     {Direction::DecodedToOriginal, 100, 2}};
  CHECK(profile_csv(rows) == "direction,per,value\nab,50,0.5\nba,100,2\n");
}

TEST_CASE("correlation report JSON and regression CSV") {
  CorrelationReport r;
  r.metric_label = "d1";
  r.n = 2;
  r.excluded_infinite = 1;
  r.plcc_raw = 0.5;
  r.plcc_fitted = 0.75;
  r.srocc = 1;
  r.rmse = 0.125;
  r.model = {1, 2, 0, 0};
  r.samples = {{1, 3}, {2, 4.5}};
  CorrelationReport s = r;
  s.metric_label = "gh98";
  s.plcc_fitted = 0.9;

  const std::vector<CorrelationReport> reps{r, s};
  const auto j = nlohmann::json::parse(correlation_report_json(reps, std::vector<std::size_t>{1, 0}));
  REQUIRE(j["reports"].size() == 2);
  CHECK(j["reports"][0]["metric_label"] == "d1");
  CHECK(j["reports"][0]["excluded_infinite"] == 1);
  CHECK(j["reports"][0]["model"]["b"] == 2.0);
  CHECK(j["ranking"] == nlohmann::json::array({"gh98", "d1"}));
  CHECK_FALSE(j.contains("timestamp"));
  CHECK_FALSE(nlohmann::json::parse(correlation_report_json(reps, std::nullopt)).contains("ranking"));

  CHECK(regression_csv(r) == "y,mos,mos_predicted\n1,3,3\n2,4.5,5\n");
}
