#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ghpsnr/errors.hpp"
#include "ghpsnr/geometry_metrics.hpp"
#include "support/oracles.hpp"

using namespace ghpsnr;
namespace gt = ghpsnr::testing;

namespace {

const PointCloud kA("A", {Vec3(0, 0, 0), Vec3(1, 0, 0)});
const PointCloud kB("B", {Vec3(0, 0, 0), Vec3(3, 0, 0)});

std::vector<double> as_vector(const DirectedErrorSet& s) { return {s.errors().begin(), s.errors().end()}; }

DirectedErrorSet random_set(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size(1, 400);
  std::exponential_distribution<double> e(1.0);
  std::uniform_int_distribution<int> small(0, 5);
  std::vector<double> v(size(rng));
  const bool discrete = rng() % 2;
  for (auto& x : v) x = discrete ? small(rng) : e(rng);
  return DirectedErrorSet(v);
}

}  // namespace

TEST_CASE("directed_errors: hand-computed two-point example") {
  const SpatialIndex ia(kA), ib(kB);
  CHECK(as_vector(directed_errors(kA, kB, DistanceKind::PointToPoint, ib)) == std::vector<double>{0, 1});
  CHECK(as_vector(directed_errors(kB, kA, DistanceKind::PointToPoint, ia)) == std::vector<double>{0, 4});
}

TEST_CASE("directed_errors: identical clouds are error free") {
  std::mt19937_64 rng(1);
  const auto c = gt::random_cloud(rng, 300, 10, true);
  const SpatialIndex idx(c);
  for (auto kind : kAllKinds) {
    const auto s = directed_errors(c, c, kind, idx);
    CHECK(s.max() == 0.0);
  }
}

TEST_CASE("directed_errors: point-to-plane projects onto the reference normal") {
  const PointCloud ref("ref", {Vec3(0, 0, 0)}, std::vector<Vec3>{Vec3(0, 0, 1)});
  const PointCloud q("q", {Vec3(1, 1, 0), Vec3(1, 1, 2)});
  const SpatialIndex idx(ref);
  const auto e = per_point_errors(q, ref, DistanceKind::PointToPlane, idx);
  CHECK(e[0] == 0.0);
  CHECK(e[1] == 4.0);
  CHECK_THROWS_AS(per_point_errors(q, kB, DistanceKind::PointToPlane, SpatialIndex(kB)), ValidationError);
}

TEST_CASE("directed_errors matches the brute-force oracle") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    const auto a = gt::random_cloud(rng, 200 + 10 * t, 5, true);
    const auto b = gt::random_cloud(rng, 150 + 7 * t, 5, true);
    const SpatialIndex ib(b);
    for (bool plane : {false, true}) {
      const auto got = per_point_errors(a, b, plane ? DistanceKind::PointToPlane : DistanceKind::PointToPoint, ib);
      const auto want = gt::brute_point_errors(a, b, plane);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("DirectedErrorSet invariants") {
  const DirectedErrorSet s({4, 0, 9, 1});
  CHECK(as_vector(s) == std::vector<double>{0, 1, 4, 9});
  CHECK(s.source_size() == 4);
  CHECK_THROWS_AS(DirectedErrorSet({}), ValidationError);
  CHECK_THROWS_AS(DirectedErrorSet({1, -1}), ValidationError);
  CHECK_THROWS_AS(DirectedErrorSet({1, INFINITY}), ValidationError);
}

TEST_CASE("reduce_mse") {
  CHECK(reduce_mse(DirectedErrorSet({0, 1})) == 0.5);
  CHECK(reduce_mse(DirectedErrorSet({0, 4})) == 2.0);
  CHECK(reduce_mse(DirectedErrorSet(std::vector<double>(50, 0.0))) == 0.0);
  std::vector<double> many(100000, 0.1);
  CHECK(reduce_mse(DirectedErrorSet(many)) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("rank_from_per") {
  CHECK(rank_from_per(80, 600) == 480);
  for (std::size_t n : {1u, 2u, 37u, 600u, 123457u}) {
    CHECK(rank_from_per(100, n) == n);
    CHECK(rank_from_per(100.0 / static_cast<double>(n), n) == 1);
  }
  CHECK(rank_from_per(75, 4) == 3);
  // Half-way cases round away from zero: 50% of 5 = 2.5 -> 3, 10% of 5 = 0.5 -> 1.
  CHECK(rank_from_per(50, 5) == 3);
  CHECK(rank_from_per(10, 5) == 1);
  CHECK(rank_from_per(30, 5) == 2);  // 1.5 -> 2
  CHECK(rank_from_per(1e-9, 10) == 1);
  CHECK_THROWS_AS(rank_from_per(0, 10), ValidationError);
  CHECK_THROWS_AS(rank_from_per(100.5, 10), ValidationError);
  CHECK_THROWS_AS(rank_from_per(std::nan(""), 10), ValidationError);
}

TEST_CASE("reduce_gh") {
  const DirectedErrorSet s({0, 1, 4, 9});
  CHECK(reduce_gh(s, 100) == 9);
  CHECK(reduce_gh(s, 75) == 4);
  CHECK(reduce_gh(s, 25) == 0);
  CHECK(reduce(s, Reduction::hausdorff()) == s.max());
}

TEST_CASE("property: reduce_gh agrees with a sort-based oracle and is monotone in per") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> per(1e-6, 100);
  for (int t = 0; t < 300; ++t) {
    const auto s = random_set(rng);
    const std::vector<double> raw = as_vector(s);
    CHECK(reduce_gh(s, 100) == *std::max_element(raw.begin(), raw.end()));
    CHECK(reduce_gh(s, 100.0 / static_cast<double>(s.source_size())) == *std::min_element(raw.begin(), raw.end()));
    std::vector<double> pers(20);
    for (auto& p : pers) p = per(rng);
    std::sort(pers.begin(), pers.end());
    double prev = -1;
    for (double p : pers) {
      const double v = reduce_gh(s, p);
      CHECK(v == gt::brute_kth(raw, p));
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("pool") {
  CHECK(pool(0.5, 2.0, Pooling::Max, 2, 2) == 2.0);
  CHECK(pool(0.5, 2.0, Pooling::Min, 2, 2) == 0.5);
  CHECK(pool(0.5, 2.0, Pooling::Avg, 2, 2) == 1.25);
  CHECK(pool(0.5, 2.0, Pooling::WAvg, 2, 2) == 1.25);
  CHECK(pool(1.0, 4.0, Pooling::WAvg, 3, 1) == doctest::Approx(7.0 / 4.0));
  for (Pooling p : kAllPoolings) CHECK(pool(0.3, 0.3, p, 7, 11) == 0.3);
  CHECK_THROWS_AS(pool(-1, 1, Pooling::Max, 1, 1), ValidationError);
  CHECK_THROWS_AS(pool(1, 1, Pooling::Max, 0, 1), ValidationError);
}

TEST_CASE("property: pooling order") {
  std::mt19937_64 rng(31);
  std::exponential_distribution<double> d(0.1);
  std::uniform_int_distribution<std::size_t> n(1, 1000000);
  for (int t = 0; t < 10000; ++t) {
    const double a = d(rng), b = d(rng);
    const std::size_t na = n(rng), nb = n(rng);
    const double mn = pool(a, b, Pooling::Min, na, nb);
    const double mx = pool(a, b, Pooling::Max, na, nb);
    const double avg = pool(a, b, Pooling::Avg, na, nb);
    const double w = pool(a, b, Pooling::WAvg, na, nb);
    REQUIRE(mn <= avg);
    REQUIRE(avg <= mx);
    REQUIRE(mn <= w);
    REQUIRE(w <= mx);
    REQUIRE(pool(a, b, Pooling::WAvg, na, na) == avg);
  }
}

TEST_CASE("psnr") {
  CHECK(psnr(3.0 * 1023.0 * 1023.0, 1023) == 0.0);
  // 10*log10(3*1023^2) = 10*log10(3139587)
  CHECK(psnr(1.0, 1023) == doctest::Approx(64.96872522143983).epsilon(1e-14));
  CHECK(std::isinf(psnr(0.0, 1023)));
  CHECK_THROWS_AS(psnr(-1.0, 1023), ValidationError);
  CHECK_THROWS_AS(psnr(1.0, 0.0), ValidationError);
  double prev = INFINITY;
  for (double d = 1e-6; d < 1e6; d *= 1.7) {
    const double v = psnr(d, 4095);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("MetricConfig validation and names") {
  CHECK_THROWS_AS((MetricConfig{DistanceKind::PointToPoint, Reduction::gh(0), Pooling::Max, 1}.validate()), ValidationError);
  CHECK_THROWS_AS((MetricConfig{DistanceKind::PointToPoint, Reduction::gh(101), Pooling::Max, 1}.validate()), ValidationError);
  CHECK_THROWS_AS(MetricConfig::d1(0).validate(), ValidationError);
  CHECK_NOTHROW(MetricConfig::d1(1023).validate());
  CHECK(parse_pooling("wavg") == Pooling::WAvg);
  CHECK(parse_distance_kind("p2pl") == DistanceKind::PointToPlane);
  CHECK(parse_reduction_kind("gh") == ReductionKind::GeneralizedHausdorff);
  CHECK_FALSE(parse_pooling("median").has_value());
  CHECK(peak_from_precision(10) == 1023);
  CHECK(peak_from_precision(12) == 4095);
}

TEST_CASE("compute_metric: chained hand example") {
  const auto r = compute_metric(kA, kB, MetricConfig::d1(1.0));
  CHECK(r.directed_ab == 0.5);
  CHECK(r.directed_ba == 2.0);
  CHECK(r.undirected == 2.0);
  CHECK(r.psnr_db == doctest::Approx(10.0 * std::log10(1.5)).epsilon(1e-15));
}

TEST_CASE("compute_metric: identical clouds give infinite PSNR for every config") {
  std::mt19937_64 rng(2);
  const auto c = gt::random_cloud(rng, 200, 10, false);
  for (auto kind : kAllKinds) {
    for (auto p : kAllPoolings) {
      for (auto red : {Reduction::mse(), Reduction::gh(50), Reduction::gh(100)}) {
        CHECK(std::isinf(compute_metric(c, c, {kind, red, p, 1023}).psnr_db));
      }
    }
  }
}

TEST_CASE("compute_metric: D1/D2 match the O(N^2) oracle") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 8; ++t) {
    const auto a = gt::random_cloud(rng, 100 + 30 * t, 50, true);
    const auto b = gt::random_cloud(rng, 80 + 40 * t, 50, true);
    const double d1 = compute_metric(a, b, MetricConfig::d1(1023)).psnr_db;
    const double d2 = compute_metric(a, b, MetricConfig::d2(1023)).psnr_db;
    CHECK(d1 == doctest::Approx(gt::brute_mse_psnr(a, b, false, 1023)).epsilon(1e-9));
    CHECK(d2 == doctest::Approx(gt::brute_mse_psnr(a, b, true, 1023)).epsilon(1e-9));
    CHECK(d2 >= d1);
  }
}

TEST_CASE("compute_metric: GH per=100 with max pooling is the classical Hausdorff PSNR") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 10; ++t) {
    const auto a = gt::random_cloud(rng, 150, 20, false);
    const auto b = gt::random_cloud(rng, 170, 20, false);
    const auto ab = gt::brute_point_errors(a, b, false);
    const auto ba = gt::brute_point_errors(b, a, false);
    const double haus = std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba.begin(), ba.end()));
    const auto r = compute_metric(a, b, {DistanceKind::PointToPoint, Reduction::hausdorff(), Pooling::Max, 255});
    CHECK(r.undirected == haus);
    CHECK(r.psnr_db == 10.0 * std::log10(3.0 * 255 * 255 / haus));
  }
}

TEST_CASE("compute_metric: estimates missing normals for point-to-plane") {
  std::mt19937_64 rng(44);
  const PointCloud a("a", gt::sphere_points(rng, 400, 10));
  const PointCloud b("b", gt::sphere_points(rng, 380, 10));
  CloudPair pair(a, b);
  CHECK(pair.original_normals() == NormalSource::None);
  const auto r = pair.evaluate(MetricConfig::d2(1023));
  CHECK(std::isfinite(r.psnr_db));
  CHECK(pair.original_normals() == NormalSource::Estimated);
  CHECK(pair.decoded_normals() == NormalSource::Estimated);
  // Each direction uses the normals of its reference cloud.
  const auto na = estimate_normals(a, 12);
  const auto nb = estimate_normals(b, 12);
  const auto want_ab = gt::brute_point_errors(a, nb, true);
  const auto want_ba = gt::brute_point_errors(b, na, true);
  const auto& got_ab = pair.point_errors(DistanceKind::PointToPlane, Direction::OriginalToDecoded);
  const auto& got_ba = pair.point_errors(DistanceKind::PointToPlane, Direction::DecodedToOriginal);
  for (std::size_t i = 0; i < want_ab.size(); ++i) CHECK(got_ab[i] == doctest::Approx(want_ab[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < want_ba.size(); ++i) CHECK(got_ba[i] == doctest::Approx(want_ba[i]).epsilon(1e-12));
}

TEST_CASE("property: point-to-plane never exceeds point-to-point") {
  std::mt19937_64 rng(45);
  for (int t = 0; t < 20; ++t) {
    const auto a = gt::random_cloud(rng, 300, 5, true);
    const auto b = gt::random_cloud(rng, 250, 5, true);
    CloudPair pair(a, b);
    for (auto dir : {Direction::OriginalToDecoded, Direction::DecodedToOriginal}) {
      const auto& po = pair.point_errors(DistanceKind::PointToPoint, dir);
      const auto& pl = pair.point_errors(DistanceKind::PointToPlane, dir);
      for (std::size_t i = 0; i < po.size(); ++i) REQUIRE(pl[i] <= po[i]);
    }
    for (auto p : kAllPoolings) {
      for (auto red : {Reduction::mse(), Reduction::gh(90), Reduction::gh(100)}) {
        const auto po = pair.evaluate({DistanceKind::PointToPoint, red, p, 1});
        const auto pl = pair.evaluate({DistanceKind::PointToPlane, red, p, 1});
        CHECK(pl.psnr_db >= po.psnr_db);
      }
    }
  }
}

TEST_CASE("property: joint translation leaves every metric unchanged") {
  std::mt19937_64 rng(46);
  // Lattice coordinates keep the translated differences exact.
  const PointCloud a("a", gt::random_grid_points(rng, 300, 64));
  const PointCloud b("b", gt::random_grid_points(rng, 280, 64));
  std::vector<Vec3> ta = a.points(), tb = b.points();
  const Vec3 shift(1024, -2048, 512);
  for (auto& p : ta) p += shift;
  for (auto& p : tb) p += shift;
  const auto grid = default_per_grid(300);
  const auto r1 = metric_grid(a, b, std::span(kAllKinds).first(1), grid, kAllPoolings, 1023);
  const auto r2 = metric_grid(PointCloud("ta", ta), PointCloud("tb", tb), std::span(kAllKinds).first(1), grid,
                              kAllPoolings, 1023);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].undirected == r2[i].undirected);
    CHECK(r1[i].psnr_db == r2[i].psnr_db);
  }
}

TEST_CASE("property: moving the worst point to a unique maximum only changes the top rank") {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 20; ++t) {
    const auto ref = gt::random_cloud(rng, 500, 10, false);
    auto q = gt::random_points(rng, 300, 10);
    const SpatialIndex idx(ref);
    const auto before = directed_errors(PointCloud("q", q), ref, DistanceKind::PointToPoint, idx);
    const auto per_point = per_point_errors(PointCloud("q", q), ref, DistanceKind::PointToPoint, idx);
    const auto worst = static_cast<std::size_t>(std::max_element(per_point.begin(), per_point.end()) - per_point.begin());
    q[worst] = Vec3(1000, 1000, 1000);
    const auto after = directed_errors(PointCloud("q", q), ref, DistanceKind::PointToPoint, idx);
    const double m = gt::brute_nearest(ref.points(), q[worst]).second;
    CHECK(reduce_gh(after, 100) == m);
    for (double per = 1; per <= 100; per += 0.5) {
      if (rank_from_per(per, q.size()) < q.size()) REQUIRE(reduce_gh(after, per) == reduce_gh(before, per));
    }
  }
}

TEST_CASE("metric_grid: counts, ordering and consistency") {
  std::mt19937_64 rng(48);
  const auto a = gt::random_cloud(rng, 300, 10, false);
  const auto b = gt::random_cloud(rng, 320, 10, false);
  const auto grid = default_per_grid(320);
  CHECK(grid.size() == 15);
  const auto results = metric_grid(a, b, kAllKinds, grid, kAllPoolings, 1023);
  CHECK(results.size() == 2 * (15 * 4 + 1));
  CHECK(results[0].config == MetricConfig::d1(1023));
  CHECK(results[61].config == MetricConfig::d2(1023));
  CHECK(results[1].config.reduction.per == grid[0]);

  const auto haus = compute_metric(a, b, {DistanceKind::PointToPoint, Reduction::hausdorff(), Pooling::Max, 1023});
  bool found = false;
  for (const auto& r : results) {
    if (r.config == haus.config) {
      CHECK(r.psnr_db == haus.psnr_db);
      found = true;
    }
  }
  CHECK(found);

  // 100/N with N the larger cloud reaches rank 1 in both directions.
  CloudPair pair(a, b);
  const auto mn = pair.evaluate({DistanceKind::PointToPoint, Reduction::gh(grid[0]), Pooling::Max, 1});
  CHECK(mn.directed_ab == pair.errors(DistanceKind::PointToPoint, Direction::OriginalToDecoded).min());
  CHECK(mn.directed_ba == pair.errors(DistanceKind::PointToPoint, Direction::DecodedToOriginal).min());

  const auto same = metric_grid(a, a, kAllKinds, default_per_grid(300), kAllPoolings, 1023);
  for (const auto& r : same) CHECK(std::isinf(r.psnr_db));
  CHECK_THROWS_AS(metric_grid(a, b, kAllKinds, std::vector<double>{}, kAllPoolings, 1023), ValidationError);
}

TEST_CASE("distance_profile") {
  const std::vector<double> grid{25, 50, 75, 100};
  const auto p = distance_profile(DirectedErrorSet({0, 1, 4, 9}), grid);
  REQUIRE(p.size() == 4);
  CHECK(p[0].value == 0);
  CHECK(p[1].value == 1);
  CHECK(p[2].value == 4);
  CHECK(p[3].value == 9);
  for (const auto& pt : distance_profile(DirectedErrorSet(std::vector<double>(30, 2.5)), grid)) CHECK(pt.value == 2.5);
}
