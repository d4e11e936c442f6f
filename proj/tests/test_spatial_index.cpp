#include <doctest.h>

#include <random>
#include <thread>

#include "ghpsnr/errors.hpp"
#include "ghpsnr/spatial_index.hpp"
#include "support/oracles.hpp"

using namespace ghpsnr;
namespace gt = ghpsnr::testing;

TEST_CASE("single point index") {
  const PointCloud c("one", {Vec3(1, 2, 3)});
  const SpatialIndex idx(c);
  std::mt19937_64 rng(1);
  for (const auto& q : gt::random_points(rng, 20, 100)) {
    const Neighbor nb = idx.nearest(q);
    CHECK(nb.index == 0);
    CHECK(nb.squared_distance == gt::brute_sq(q, c.point(0)));
  }
}

TEST_CASE("hand-computed neighbours and the tie rule") {
  const PointCloud b("b", {Vec3(0, 0, 0), Vec3(3, 0, 0)});
  const SpatialIndex idx(b);
  CHECK(idx.nearest(Vec3(1, 0, 0)) == Neighbor{0, 1.0});
  CHECK(idx.nearest(Vec3(1.5, 0, 0)) == Neighbor{0, 2.25});
  CHECK(idx.nearest(Vec3(3, 0, 0)) == Neighbor{1, 0.0});
}

TEST_CASE("duplicates: a duplicated point is its own nearest at distance zero") {
  std::vector<Vec3> pts(40, Vec3(5, 5, 5));
  pts.push_back(Vec3(0, 0, 0));
  const PointCloud c("dups", pts);
  const SpatialIndex idx(c);
  CHECK(idx.nearest(Vec3(5, 5, 5)) == Neighbor{0, 0.0});
  CHECK(idx.nearest(Vec3(0, 0, 0)) == Neighbor{40, 0.0});
}

TEST_CASE("non-finite queries are rejected") {
  const PointCloud c("c", {Vec3(0, 0, 0)});
  const SpatialIndex idx(c);
  CHECK_THROWS_AS(idx.nearest(Vec3(std::nan(""), 0, 0)), ValidationError);
  CHECK_THROWS_AS(idx.k_nearest(Vec3(0, INFINITY, 0), 1), ValidationError);
}

TEST_CASE("property: nearest equals brute force (continuous and lattice clouds)") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(1, 2000);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = size(rng);
    const bool lattice = trial % 2 == 1;
    const auto pts = lattice ? gt::random_grid_points(rng, n, 12) : gt::random_points(rng, n, 10);
    const PointCloud c("c", pts);
    const SpatialIndex idx(c);

    auto queries = lattice ? gt::random_grid_points(rng, 200, 14) : gt::random_points(rng, 200, 12);
    // Lattice midpoints produce many exact ties.
    if (lattice) {
      for (auto& q : queries) q += Vec3(0.5, 0.0, 0.5);
    }
    for (const auto& q : queries) {
      const auto [bi, bd] = gt::brute_nearest(pts, q);
      const Neighbor nb = idx.nearest(q);
      REQUIRE(nb.squared_distance == bd);
      REQUIRE(nb.index == bi);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      REQUIRE(idx.nearest(pts[i]).squared_distance == 0.0);
    }
  }
}

TEST_CASE("property: k_nearest equals sorted brute force") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = trial % 2 ? gt::random_grid_points(rng, 500, 6) : gt::random_points(rng, 500, 3);
    const PointCloud c("c", pts);
    const SpatialIndex idx(c);
    for (std::size_t qi = 0; qi < 50; ++qi) {
      const std::size_t k = 1 + qi % 20;
      const Vec3& q = pts[qi];
      std::vector<Neighbor> all;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i != qi) all.push_back({i, gt::brute_sq(q, pts[i])});
      }
      std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.squared_distance < b.squared_distance ||
               (a.squared_distance == b.squared_distance && a.index < b.index);
      });
      all.resize(k);
      REQUIRE(idx.k_nearest(q, k, qi) == all);
    }
  }
}

TEST_CASE("k_nearest returns what exists when k exceeds the cloud") {
  const PointCloud c("c", {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)});
  const SpatialIndex idx(c);
  const auto nb = idx.k_nearest(Vec3(0, 0, 0), 10, 0);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0].index == 1);
  CHECK(nb[1].index == 2);
  CHECK(idx.k_nearest(Vec3(0, 0, 0), 0).empty());
}

TEST_CASE("concurrent readers see identical results") {
  std::mt19937_64 rng(5);
  const auto pts = gt::random_points(rng, 5000, 10);
  const PointCloud c("c", pts);
  const SpatialIndex idx(c);
  const auto queries = gt::random_points(rng, 2000, 10);
  std::vector<Neighbor> serial;
  for (const auto& q : queries) serial.push_back(idx.nearest(q));

  std::vector<std::vector<Neighbor>> out(4, std::vector<Neighbor>(queries.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < out.size(); ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = 0; i < queries.size(); ++i) out[t][i] = idx.nearest(queries[i]);
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& o : out) CHECK(o == serial);
}
