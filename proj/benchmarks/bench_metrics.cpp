#include <benchmark/benchmark.h>

#include <random>

#include "ghpsnr/distortion_lab.hpp"
#include "ghpsnr/geometry_metrics.hpp"
#include "ghpsnr/normal_estimation.hpp"
#include "ghpsnr/spatial_index.hpp"

using namespace ghpsnr;

namespace {

PointCloud surface_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = 512.0 * Vec3(g(rng), g(rng), g(rng)).normalized();
  return PointCloud("sphere", std::move(pts), std::nullopt, 10);
}

void BM_IndexBuild(benchmark::State& state) {
  const auto cloud = surface_cloud(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    SpatialIndex idx(cloud);
    benchmark::DoNotOptimize(idx.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_NearestQuery(benchmark::State& state) {
  const auto cloud = surface_cloud(static_cast<std::size_t>(state.range(0)), 2);
  const auto queries = surface_cloud(4096, 3);
  const SpatialIndex idx(cloud);
  for (auto _ : state) {
    for (const auto& q : queries.points()) benchmark::DoNotOptimize(idx.nearest(q));
  }
  state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_NearestQuery)->Arg(10000)->Arg(100000);

void BM_KNearest(benchmark::State& state) {
  const auto cloud = surface_cloud(100000, 4);
  const SpatialIndex idx(cloud);
  const auto k = static_cast<std::size_t>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(idx.k_nearest(cloud.point(i), k, i));
    i = (i + 1) % cloud.size();
  }
}
BENCHMARK(BM_KNearest)->Arg(12)->Arg(32);

void BM_DirectedErrors(benchmark::State& state) {
  const auto a = surface_cloud(static_cast<std::size_t>(state.range(0)), 5);
  const auto b = gaussian_jitter(a, 0.5, 6);
  const SpatialIndex idx(b);
  for (auto _ : state) {
    benchmark::DoNotOptimize(directed_errors(a, b, DistanceKind::PointToPoint, idx));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DirectedErrors)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_NormalEstimation(benchmark::State& state) {
  const auto cloud = surface_cloud(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_normals(cloud, kDefaultNormalNeighbors));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NormalEstimation)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

// The full 122-entry table, including normal estimation for point-to-plane.
void BM_MetricGrid(benchmark::State& state) {
  const auto a = surface_cloud(static_cast<std::size_t>(state.range(0)), 8);
  const auto b = octree_prune(a, 7);
  const auto pers = default_per_grid(std::max(a.size(), b.size()));
  for (auto _ : state) {
    benchmark::DoNotOptimize(metric_grid(a, b, kAllKinds, pers, kAllPoolings, 1023.0));
  }
}
BENCHMARK(BM_MetricGrid)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
