#include "ghpsnr/distortion_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ghpsnr/errors.hpp"

namespace ghpsnr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void DistortionSpec::validate() const {
  std::visit(overloaded{
                 [](const OctreePrune& o) {
                   if (o.depth < 1 || o.depth > 21) {
                     throw ValidationError("octree depth must lie in [1, 21]");
                   }
                 },
                 [](const GaussianJitter& g) {
                   if (!(g.sigma > 0.0) || !std::isfinite(g.sigma)) {
                     throw ValidationError("jitter sigma must be positive");
                   }
                 },
                 [](const OutlierInject& o) {
                   if (!(o.fraction > 0.0 && o.fraction < 1.0)) {
                     throw ValidationError("outlier fraction must lie in (0, 1)");
                   }
                   if (!(o.magnitude > 0.0) || !std::isfinite(o.magnitude)) {
                     throw ValidationError("outlier magnitude must be positive");
                   }
                 },
             },
             kind);
}

OctreeGrid::OctreeGrid(const PointCloud& cloud, int depth) {
  if (depth < 1 || depth > 21) throw ValidationError("octree depth must lie in [1, 21]");
  Vec3 lo = cloud.point(0);
  Vec3 hi = cloud.point(0);
  for (const Vec3& p : cloud.points()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double side = (hi - lo).maxCoeff();
  const Vec3 center = (lo + hi) / 2.0;
  cells = 1u << depth;
  leaf = side / static_cast<double>(cells);
  origin = center - Vec3::Constant(side / 2.0);
}

Vec3 OctreeGrid::center_of(const Vec3& p) const {
  if (leaf == 0.0) return origin;
  Vec3 c;
  for (int a = 0; a < 3; ++a) {
    const double cell = std::floor((p[a] - origin[a]) / leaf);
    const double idx = std::clamp(cell, 0.0, static_cast<double>(cells - 1));
    c[a] = origin[a] + (idx + 0.5) * leaf;
  }
  return c;
}

PointCloud octree_prune(const PointCloud& cloud, int depth) {
  const OctreeGrid grid(cloud, depth);
  std::vector<Vec3> out;
  std::unordered_set<std::uint64_t> occupied;
  for (const Vec3& p : cloud.points()) {
    std::uint64_t key = 0;
    if (grid.leaf > 0.0) {
      for (int a = 0; a < 3; ++a) {
        const double cell = std::floor((p[a] - grid.origin[a]) / grid.leaf);
        const auto idx = static_cast<std::uint64_t>(
            std::clamp(cell, 0.0, static_cast<double>(grid.cells - 1)));
        key = (key << 21) | idx;
      }
    }
    if (occupied.insert(key).second) out.push_back(grid.center_of(p));
  }
  return PointCloud(cloud.name() + "_octree" + std::to_string(depth), std::move(out), std::nullopt,
                    cloud.precision_bits());
}

PointCloud gaussian_jitter(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  DistortionSpec{GaussianJitter{sigma}, seed}.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<Vec3> pts = cloud.points();
  for (Vec3& p : pts) {
    for (int a = 0; a < 3; ++a) p[a] += noise(rng);
  }
  return PointCloud(cloud.name() + "_jitter", std::move(pts), std::nullopt, cloud.precision_bits());
}

std::size_t outlier_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

PointCloud inject_outliers(const PointCloud& cloud, double fraction, double magnitude,
                           std::uint64_t seed) {
  DistortionSpec{OutlierInject{fraction, magnitude}, seed}.validate();
  const std::size_t n = cloud.size();
  const std::size_t count = outlier_count(fraction, n);
  if (fraction * static_cast<double>(n) < 1.0 - 1e-9) {
    throw ValidationError("outlier fraction " + std::to_string(fraction) +
                          " selects less than one point of " + std::to_string(n));
  }

  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(chosen.begin(), chosen.end());

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec3> pts = cloud.points();
  for (std::size_t idx : chosen) {
    Vec3 dir;
    do {
      dir = Vec3(gauss(rng), gauss(rng), gauss(rng));
    } while (dir.norm() < 1e-12);
    pts[idx] += magnitude * dir.normalized();
  }
  return PointCloud(cloud.name() + "_outliers", std::move(pts), std::nullopt,
                    cloud.precision_bits());
}

PointCloud apply_distortion(const PointCloud& cloud, const DistortionSpec& spec) {
  spec.validate();
  return std::visit(
      overloaded{
          [&](const OctreePrune& o) { return octree_prune(cloud, o.depth); },
          [&](const GaussianJitter& g) { return gaussian_jitter(cloud, g.sigma, spec.seed); },
          [&](const OutlierInject& o) {
            return inject_outliers(cloud, o.fraction, o.magnitude, spec.seed);
          },
      },
      spec.kind);
}

std::string distortion_spec_to_json(const DistortionSpec& spec) {
  nlohmann::ordered_json j;
  std::visit(overloaded{
                 [&](const OctreePrune& o) {
                   j["kind"] = "octree_prune";
                   j["depth"] = o.depth;
                 },
                 [&](const GaussianJitter& g) {
                   j["kind"] = "gaussian_jitter";
                   j["sigma"] = g.sigma;
                 },
                 [&](const OutlierInject& o) {
                   j["kind"] = "outlier_inject";
                   j["fraction"] = o.fraction;
                   j["magnitude"] = o.magnitude;
                 },
             },
             spec.kind);
  j["seed"] = spec.seed;
  j["rng"] = "mt19937_64";
  return j.dump(2);
}

DistortionSpec distortion_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("distortion spec: ") + e.what());
  }
  DistortionSpec spec;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "octree_prune") {
      spec.kind = OctreePrune{j.at("depth").get<int>()};
    } else if (kind == "gaussian_jitter") {
      spec.kind = GaussianJitter{j.at("sigma").get<double>()};
    } else if (kind == "outlier_inject") {
      spec.kind = OutlierInject{j.at("fraction").get<double>(), j.at("magnitude").get<double>()};
    } else {
      throw ValidationError("distortion spec: unknown kind '" + kind + "'");
    }
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("distortion spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace ghpsnr
