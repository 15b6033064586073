// Eigenvalue-ratio constraint enforcement for the mixture M-step.
//
// Given weighted scatter matrices S_g and weight sums w_g, the update keeps
// each component's eigenvectors and replaces the eigenvalues lambda of
// S_g / w_g by clip(lambda, m, gamma*m), choosing m to minimize
//
//   sum_g w_g sum_j ( log lclip_gj + lambda_gj / lclip_gj ),
//
// the weighted Gaussian negative log-likelihood term. The objective is
// piecewise smooth in m with breakpoints at {lambda, lambda/gamma}; on each
// interval the stationary point has a closed form, so the global optimum is
// found exactly by scanning the intervals.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "otrimle/errors.hpp"

namespace otrimle {

namespace detail {

struct EigenSystem {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};

inline double truncation_objective(const std::vector<Eigen::VectorXd>& lambdas,
                                   const std::vector<double>& weights, double gamma,
                                   double m) {
  double f = 0.0;
  for (std::size_t g = 0; g < lambdas.size(); ++g) {
    const auto& lam = lambdas[g];
    double term = 0.0;
    for (int j = 0; j < lam.size(); ++j) {
      const double t = std::clamp(lam[j], m, gamma * m);
      term += std::log(t) + lam[j] / t;
    }
    f += weights[g] * term;
  }
  return f;
}

// Optimal truncation level for clip(lambda, m, gamma*m).
inline double optimal_truncation(const std::vector<Eigen::VectorXd>& lambdas,
                                 const std::vector<double>& weights, double gamma) {
  std::vector<double> breaks;
  double maxLambda = 0.0;
  for (const auto& lam : lambdas)
    for (int j = 0; j < lam.size(); ++j) {
      maxLambda = std::max(maxLambda, lam[j]);
      if (lam[j] > 0.0) {
        breaks.push_back(lam[j]);
        breaks.push_back(lam[j] / gamma);
      }
    }
  if (maxLambda <= 0.0)
    throw DegenerateCovarianceError("all scatter eigenvalues are zero");
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double bestM = breaks.front();
  double bestF = std::numeric_limits<double>::infinity();
  auto consider = [&](double m) {
    if (!(m > 0.0) || !std::isfinite(m)) return;
    const double f = truncation_objective(lambdas, weights, gamma, m);
    if (f < bestF || (f == bestF && m < bestM)) {
      bestF = f;
      bestM = m;
    }
  };

  const std::size_t k = breaks.size();
  for (std::size_t i = 0; i <= k; ++i) {
    const double lo = (i == 0) ? 0.0 : breaks[i - 1];
    const double hi = (i == k) ? 2.0 * breaks.back() : breaks[i];
    const double rep = (i == 0) ? 0.5 * hi : (i == k ? 2.0 * lo : 0.5 * (lo + hi));
    // Classification of eigenvalues is constant within the open interval.
    double nOut = 0.0;
    double sOut = 0.0;
    for (std::size_t g = 0; g < lambdas.size(); ++g) {
      const auto& lam = lambdas[g];
      for (int j = 0; j < lam.size(); ++j) {
        if (lam[j] < rep) {
          nOut += weights[g];
          sOut += weights[g] * lam[j];
        } else if (lam[j] > gamma * rep) {
          nOut += weights[g];
          sOut += weights[g] * lam[j] / gamma;
        }
      }
    }
    if (nOut > 0.0 && sOut > 0.0) {
      double mStar = sOut / nOut;
      mStar = lo > 0.0 ? std::clamp(mStar, lo, hi) : std::min(mStar, hi);
      consider(mStar);
    }
    consider(hi);
    if (lo > 0.0) consider(lo);
  }
  return bestM;
}

}  // namespace detail

inline double eigenvalue_ratio(const std::vector<Eigen::MatrixXd>& covs) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& cov : covs) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

inline std::vector<Eigen::MatrixXd> constrained_cov_update(
    const std::vector<Eigen::MatrixXd>& scatters, const std::vector<double>& weightSums,
    double gamma) {
  if (gamma < 1.0) throw ConfigError("gamma must be >= 1");
  if (scatters.size() != weightSums.size() || scatters.empty())
    throw ConfigError("scatters and weightSums must be non-empty and matched");
  for (double w : weightSums)
    if (!(w > 0.0)) throw ConfigError("weight sums must be positive");

  const std::size_t G = scatters.size();
  std::vector<detail::EigenSystem> systems(G);
  std::vector<Eigen::VectorXd> lambdas(G);
  double minLambda = std::numeric_limits<double>::infinity();
  double maxLambda = 0.0;
  for (std::size_t g = 0; g < G; ++g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scatters[g] / weightSums[g]);
    if (es.info() != Eigen::Success)
      throw DegenerateCovarianceError("eigendecomposition failed");
    systems[g] = {es.eigenvectors(), es.eigenvalues()};
    lambdas[g] = es.eigenvalues().cwiseMax(0.0);  // clip tiny negative round-off
    minLambda = std::min(minLambda, lambdas[g].minCoeff());
    maxLambda = std::max(maxLambda, lambdas[g].maxCoeff());
  }
  if (maxLambda <= 0.0)
    throw DegenerateCovarianceError("all scatter eigenvalues are zero");

  // Already feasible: the unconstrained solution is optimal.
  if (minLambda > 0.0 && maxLambda / minLambda <= gamma) {
    std::vector<Eigen::MatrixXd> covs(G);
    for (std::size_t g = 0; g < G; ++g) covs[g] = scatters[g] / weightSums[g];
    return covs;
  }

  const double m = detail::optimal_truncation(lambdas, weightSums, gamma);
  std::vector<Eigen::MatrixXd> covs(G);
  for (std::size_t g = 0; g < G; ++g) {
    Eigen::VectorXd clipped = lambdas[g].cwiseMax(m).cwiseMin(gamma * m);
    covs[g] = systems[g].vectors * clipped.asDiagonal() * systems[g].vectors.transpose();
    covs[g] = 0.5 * (covs[g] + covs[g].transpose());
  }
  return covs;
}

}  // namespace otrimle
