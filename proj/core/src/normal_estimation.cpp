#include "ghpsnr/normal_estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ghpsnr/errors.hpp"

namespace ghpsnr {

namespace {

Vec3 canonical_sign(Vec3 v) {
  for (int a = 0; a < 3; ++a) {
    if (std::abs(v[a]) > 1e-12) {
      if (v[a] < 0) v = -v;
      break;
    }
  }
  return v;
}

bool lex_less(const Vec3& a, const Vec3& b) {
  for (int i = 0; i < 3; ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

Vec3 smallest_eigenvector(const Eigen::Matrix3d& symmetric) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(symmetric);
  if (solver.info() != Eigen::Success) throw NumericError("eigen decomposition did not converge");
  const Eigen::Vector3d& values = solver.eigenvalues();  // ascending
  const Eigen::Matrix3d& vectors = solver.eigenvectors();

  const double scale = std::max(values.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  int tied = 1;
  while (tied < 3 && values[tied] - values[0] <= kEigenTieTolerance * scale) ++tied;

  if (tied == 1) return canonical_sign(vectors.col(0).normalized());

  const Eigen::MatrixXd basis = vectors.leftCols(tied);
  const Eigen::Matrix3d projector = basis * basis.transpose();
  std::optional<Vec3> best;
  for (int axis = 0; axis < 3; ++axis) {
    const Vec3 p = projector.col(axis);
    if (p.norm() < 1e-6) continue;
    const Vec3 cand = canonical_sign(p.normalized());
    if (!best || lex_less(cand, *best)) best = cand;
  }
  return *best;
}

PointCloud estimate_normals(const PointCloud& cloud, std::size_t k) {
  if (cloud.has_normals()) return cloud;
  const SpatialIndex index(cloud);
  return estimate_normals(cloud, index, k);
}

PointCloud estimate_normals(const PointCloud& cloud, const SpatialIndex& index, std::size_t k) {
  if (cloud.has_normals()) return cloud;
  if (k < 3) throw ValidationError("normal estimation: k must be at least 3");
  if (k >= cloud.size()) {
    throw ValidationError("normal estimation: k=" + std::to_string(k) + " needs more than " +
                          std::to_string(k) + " points, cloud has " + std::to_string(cloud.size()));
  }
  if (index.size() != cloud.size()) {
    throw ValidationError("normal estimation: index does not match cloud");
  }

  const auto& pts = cloud.points();
  const auto n = static_cast<std::ptrdiff_t>(pts.size());
  std::vector<Vec3> normals(pts.size());
  std::vector<std::ptrdiff_t> degenerate;
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto nbrs = index.k_nearest(pts[static_cast<std::size_t>(i)], k,
                                        static_cast<std::size_t>(i));
      Vec3 centroid = Vec3::Zero();
      for (const auto& nb : nbrs) centroid += pts[nb.index];
      centroid /= static_cast<double>(nbrs.size());
      Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
      for (const auto& nb : nbrs) {
        const Vec3 d = pts[nb.index] - centroid;
        cov += d * d.transpose();
      }
      cov /= static_cast<double>(nbrs.size());

      const double tol = 1e-12 * std::max(1.0, centroid.cwiseAbs().maxCoeff());
      if (cov.trace() <= tol * tol) {
#pragma omp critical
        degenerate.push_back(i);
        continue;
      }
      normals[static_cast<std::size_t>(i)] = smallest_eigenvector(cov);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  if (!degenerate.empty()) {
    const auto first = *std::min_element(degenerate.begin(), degenerate.end());
    throw NumericError("normal estimation: degenerate neighbourhood at point " +
                       std::to_string(first) + " (all " + std::to_string(k) +
                       " neighbours coincide)");
  }
  return cloud.with_normals(std::move(normals));
}

}  // namespace ghpsnr
