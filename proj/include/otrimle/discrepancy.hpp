// Kolmogorov-type discrepancy between the posterior-weighted empirical CDF
// of squared within-cluster Mahalanobis distances and the chi^2_p CDF.
// Distances of every observation to every cluster are pooled into a single
// weighted ECDF normalized by the number of observations, so its total mass
// is 1 minus the mean noise posterior. The mass deficit keeps the sup
// distance from rewarding fits that classify large parts of the data as
// noise and rescale the rest. The sup is taken over both one-sided limits at
// each observed distance, which is where a step function attains it.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "otrimle/gaussian.hpp"
#include "otrimle/math_util.hpp"
#include "otrimle/types.hpp"

namespace otrimle {

inline double kolmogorov_discrepancy(const RimleFit& fit, const DataMatrix& X) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const int G = fit.components();
  if (G < 1) throw ConfigError("fit has no clusters");
  if (fit.posteriors.rows() != n || fit.posteriors.cols() != G + 1)
    throw ConfigError("posterior matrix does not match the data");

  std::vector<std::pair<double, double>> pool;  // (distance, weight)
  pool.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(G));
  double totalWeight = 0.0;
  for (int g = 0; g < G; ++g) {
    const Eigen::VectorXd d =
        mahalanobis_sq(X, fit.params.means[static_cast<std::size_t>(g)],
                       fit.params.covs[static_cast<std::size_t>(g)]);
    for (int i = 0; i < n; ++i) {
      const double w = fit.posteriors(i, g + 1);
      if (w > 0.0) {
        pool.emplace_back(d[i], w);
        totalWeight += w;
      }
    }
  }
  // one effective observation is the least that gives a defined sup
  if (totalWeight < 1.0)
    throw DiscrepancyUndefinedError(
        "non-noise weight too small for the Kolmogorov discrepancy");

  const double mass = static_cast<double>(n);
  std::sort(pool.begin(), pool.end());
  double sup = 0.0;
  double cum = 0.0;
  std::size_t i = 0;
  while (i < pool.size()) {
    const double d = pool[i].first;
    const double before = cum / mass;
    while (i < pool.size() && pool[i].first == d) {
      cum += pool[i].second;
      ++i;
    }
    const double after = cum / mass;
    const double ref = chi2_cdf(d, static_cast<double>(p));
    sup = std::max({sup, std::abs(before - ref), std::abs(after - ref)});
  }
  // beyond the largest distance the ECDF stays at the non-noise mass while
  // the reference tends to one
  sup = std::max(sup, 1.0 - cum / mass);
  return sup;
}

namespace detail {

inline double discrepancy_or_nan(const RimleFit& fit, const DataMatrix& X) {
  try {
    return kolmogorov_discrepancy(fit, X);
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace detail

}  // namespace otrimle
