#include "ghpsnr/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "ghpsnr/errors.hpp"

namespace ghpsnr {

namespace {

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

RegressionModel fit_cubic(std::span<const ScorePair> pairs) {
  if (pairs.size() < 4) throw ValidationError("cubic fit needs at least 4 pairs");
  std::set<double> distinct;
  for (const auto& p : pairs) {
    if (!std::isfinite(p.y) || !std::isfinite(p.mos)) {
      throw ValidationError("cubic fit: non-finite sample");
    }
    distinct.insert(p.y);
  }
  if (distinct.size() < 4) {
    throw NumericError("cubic fit is rank deficient: " + std::to_string(distinct.size()) +
                       " distinct objective values, 4 required");
  }

  const auto n = static_cast<Eigen::Index>(pairs.size());
  double mu = 0.0;
  for (const auto& p : pairs) mu += p.y;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& p : pairs) var += (p.y - mu) * (p.y - mu);
  const double sigma = std::sqrt(var / static_cast<double>(n));

  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = (pairs[static_cast<std::size_t>(i)].y - mu) / sigma;
    design(i, 0) = 1.0;
    design(i, 1) = z;
    design(i, 2) = z * z;
    design(i, 3) = z * z * z;
    target(i) = pairs[static_cast<std::size_t>(i)].mos;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 4) throw NumericError("cubic fit design matrix is rank deficient");
  const Eigen::Vector4d alpha = qr.solve(target);

  // Substitute z = u*y + v and expand the cubic in y.
  const double u = 1.0 / sigma;
  const double v = -mu / sigma;
  RegressionModel m;
  m.a = alpha[0] + alpha[1] * v + alpha[2] * v * v + alpha[3] * v * v * v;
  m.b = alpha[1] * u + 2.0 * alpha[2] * u * v + 3.0 * alpha[3] * u * v * v;
  m.c = alpha[2] * u * u + 3.0 * alpha[3] * u * u * v;
  m.d = alpha[3] * u * u * u;
  if (!std::isfinite(m.a) || !std::isfinite(m.b) || !std::isfinite(m.c) || !std::isfinite(m.d)) {
    throw NumericError("cubic fit produced non-finite coefficients");
  }
  return m;
}

double plcc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("plcc: length mismatch");
  if (x.size() < 2) throw ValidationError("plcc: at least 2 samples required");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double srocc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("srocc: length mismatch");
  if (x.size() < 2) throw ValidationError("srocc: at least 2 samples required");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return plcc(rx, ry);
}

double rmse(const RegressionModel& model, std::span<const ScorePair> pairs) {
  if (pairs.empty()) throw ValidationError("rmse: no samples");
  double acc = 0.0;
  for (const auto& p : pairs) {
    const double r = p.mos - model(p.y);
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(pairs.size()));
}

CorrelationReport evaluate_metric(const std::vector<MosRecord>& records,
                                  const std::string& metric_label) {
  CorrelationReport rep;
  rep.metric_label = metric_label;
  for (const auto& r : records) {
    const auto it = r.objective_scores.find(metric_label);
    if (it == r.objective_scores.end()) {
      std::string available;
      for (const auto& label : score_labels(records)) {
        available += available.empty() ? label : ", " + label;
      }
      throw ValidationError("record '" + r.stimulus_id + "' has no score '" + metric_label +
                            "' (available: " + (available.empty() ? "none" : available) + ")");
    }
    if (!std::isfinite(it->second)) {
      ++rep.excluded_infinite;
      continue;
    }
    rep.samples.push_back({it->second, r.mos});
  }
  if (rep.samples.size() < 4) {
    throw ValidationError("metric '" + metric_label + "': " + std::to_string(rep.samples.size()) +
                          " finite samples, at least 4 required");
  }
  std::sort(rep.samples.begin(), rep.samples.end(), [](const ScorePair& a, const ScorePair& b) {
    return a.y < b.y || (a.y == b.y && a.mos < b.mos);
  });
  rep.n = rep.samples.size();

  std::vector<double> y(rep.n);
  std::vector<double> mos(rep.n);
  std::vector<double> predicted(rep.n);
  rep.model = fit_cubic(rep.samples);
  for (std::size_t i = 0; i < rep.n; ++i) {
    y[i] = rep.samples[i].y;
    mos[i] = rep.samples[i].mos;
    predicted[i] = rep.model(y[i]);
  }
  rep.plcc_raw = plcc(y, mos);
  rep.plcc_fitted = plcc(predicted, mos);
  rep.srocc = srocc(y, mos);
  rep.rmse = rmse(rep.model, rep.samples);
  return rep;
}

std::vector<std::size_t> rank_by_plcc(const std::vector<CorrelationReport>& reports) {
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (reports[a].plcc_fitted != reports[b].plcc_fitted) {
      return reports[a].plcc_fitted > reports[b].plcc_fitted;
    }
    return reports[a].metric_label < reports[b].metric_label;
  });
  return order;
}

}  // namespace ghpsnr
