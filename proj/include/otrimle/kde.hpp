// One-dimensional cluster shape measurement: Gaussian-quantile evaluation
// grid, weighted kernel density estimate, and the discrepancy of the
// estimated density from its own symmetric monotone rearrangement.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "otrimle/errors.hpp"
#include "otrimle/math_util.hpp"

namespace otrimle {

// q standard Gaussian quantiles at equidistant probabilities; symmetric
// about zero by construction.
struct EvalGrid {
  int q = 0;
  Eigen::VectorXd probs;
  Eigen::VectorXd z;

  static EvalGrid standard(int q = 100, double probLo = 0.005, double probHi = 0.995) {
    if (q < 2 || q % 2 != 0) throw ConfigError("grid size q must be even and >= 2");
    if (!(probLo > 0.0 && probHi < 1.0 && probLo < probHi))
      throw ConfigError("grid probabilities must satisfy 0 < lo < hi < 1");
    if (std::abs(probLo + probHi - 1.0) > 1e-12)
      throw ConfigError("grid probabilities must be symmetric about 0.5");
    EvalGrid grid;
    grid.q = q;
    grid.probs.resize(q);
    grid.z.resize(q);
    const double step = (probHi - probLo) / (q - 1);
    for (int k = 0; k < q / 2; ++k) {
      const double pk = probLo + k * step;
      grid.probs[k] = pk;
      grid.probs[q - 1 - k] = 1.0 - pk;
      const double zk = norm_quantile(pk);
      grid.z[k] = zk;
      grid.z[q - 1 - k] = -zk;
    }
    return grid;
  }

  static EvalGrid from_probs(const Eigen::VectorXd& probs) {
    const int q = static_cast<int>(probs.size());
    if (q < 2) throw ConfigError("grid needs at least two probabilities");
    return standard(q, probs[0], probs[q - 1]);
  }
};

namespace detail {

inline double weighted_quantile(const std::vector<double>& sortedValues,
                                const std::vector<double>& cumWeights, double totalWeight,
                                double prob) {
  const double target = prob * totalWeight;
  auto it = std::lower_bound(cumWeights.begin(), cumWeights.end(), target);
  if (it == cumWeights.end()) return sortedValues.back();
  return sortedValues[static_cast<std::size_t>(it - cumWeights.begin())];
}

}  // namespace detail

// Weighted rule-of-thumb bandwidth: 0.9 * min(sd_w, IQR_w/1.34) * n_eff^(-1/5)
// with n_eff the Kish effective sample size.
inline double kde_bandwidth(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  const int n = static_cast<int>(values.size());
  if (n < 1 || weights.size() != n) throw ConfigError("values/weights size mismatch");
  const double wSum = weights.sum();
  if (!(wSum > 0.0)) throw ConfigError("weights must have positive sum");
  const double mean = values.dot(weights) / wSum;
  const double var = (values.array() - mean).square().matrix().dot(weights) / wSum;
  if (!(var > 0.0))
    throw DegenerateClusterError("zero weighted variance in kernel density input");
  const double sd = std::sqrt(var);
  const double nEff = wSum * wSum / weights.squaredNorm();

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return values[a] < values[b]; });
  std::vector<double> sortedValues(static_cast<std::size_t>(n));
  std::vector<double> cumWeights(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    sortedValues[static_cast<std::size_t>(i)] = values[order[static_cast<std::size_t>(i)]];
    acc += weights[order[static_cast<std::size_t>(i)]];
    cumWeights[static_cast<std::size_t>(i)] = acc;
  }
  const double iqr = detail::weighted_quantile(sortedValues, cumWeights, wSum, 0.75) -
                     detail::weighted_quantile(sortedValues, cumWeights, wSum, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(nEff, -0.2);
}

// Gaussian-kernel density estimate at the grid points, weights normalized.
inline Eigen::VectorXd kde_weighted(const Eigen::VectorXd& values,
                                    const Eigen::VectorXd& weights, const EvalGrid& grid,
                                    std::optional<double> bandwidth = std::nullopt) {
  const int n = static_cast<int>(values.size());
  if (weights.size() != n) throw ConfigError("values/weights size mismatch");
  if ((weights.array() < 0.0).any()) throw ConfigError("weights must be nonnegative");
  const double wSum = weights.sum();
  if (!(wSum > 0.0)) throw ConfigError("weights must have positive sum");
  const double h = bandwidth ? *bandwidth : kde_bandwidth(values, weights);
  if (!(h > 0.0)) throw DegenerateClusterError("kernel bandwidth is not positive");

  Eigen::VectorXd density(grid.q);
  const Eigen::ArrayXd v = values.array();
  const Eigen::ArrayXd w = weights.array();
  const double norm = 1.0 / (wSum * h * std::sqrt(2.0 * M_PI));
  for (int k = 0; k < grid.q; ++k) {
    const Eigen::ArrayXd t = (grid.z[k] - v) / h;
    density[k] = norm * (w * (-0.5 * t.square()).exp()).sum();
  }
  return density;
}

// Distance of a density vector from symmetric unimodality. Sorted density
// values are paired and averaged to build the symmetric monotone
// rearrangement; the result is the root mean squared difference between the
// observed values and that rearrangement, zero exactly when the input is
// symmetric about the grid midpoint and decreasing from it.
inline double symmetrize_discrepancy(const Eigen::VectorXd& densities,
                                     const EvalGrid& grid) {
  const int q = grid.q;
  if (q < 2 || q % 2 != 0) throw ConfigError("grid size q must be even and >= 2");
  if (densities.size() != q) throw ConfigError("density vector does not match the grid");

  std::vector<double> sorted(densities.data(), densities.data() + q);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const int half = q / 2;
  std::vector<double> paired(static_cast<std::size_t>(half));
  for (int h = 0; h < half; ++h)
    paired[static_cast<std::size_t>(h)] =
        0.5 * (sorted[static_cast<std::size_t>(2 * h)] +
               sorted[static_cast<std::size_t>(2 * h + 1)]);

  double left = 0.0;
  double right = 0.0;
  for (int i = 1; i <= half; ++i) {
    const double ref = paired[static_cast<std::size_t>(i - 1)];
    const double dl = densities[half - i] - ref;
    const double dr = densities[half + i - 1] - ref;
    left += dl * dl;
    right += dr * dr;
  }
  return std::sqrt((left + right) / q);
}

}  // namespace otrimle
