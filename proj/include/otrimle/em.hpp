// ECM estimation of the improper-noise Gaussian mixture at fixed delta.
// E-step: posterior probabilities including the constant-density noise
// column. M-step: weighted moments followed by the eigenratio-constrained
// covariance update, which solves the constrained subproblem exactly, so the
// pseudo log-likelihood never decreases.
#pragma once

#include <algorithm>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "otrimle/constraint.hpp"
#include "otrimle/discrepancy.hpp"
#include "otrimle/gaussian.hpp"
#include "otrimle/rng.hpp"
#include "otrimle/types.hpp"

namespace otrimle {

namespace detail {

// k-means++-style seeding with squared distances capped at their 90th
// percentile, so a single gross outlier cannot dominate the seeding law.
inline std::vector<int> seed_centers(const DataMatrix& X, int G, Rng& rng) {
  const int n = static_cast<int>(X.rows());
  std::vector<int> centers;
  centers.reserve(static_cast<std::size_t>(G));
  centers.push_back(static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n))));
  Eigen::VectorXd d2 =
      (X.rowwise() - X.row(centers[0])).rowwise().squaredNorm();
  for (int g = 1; g < G; ++g) {
    Eigen::VectorXd capped = d2;
    std::vector<double> sorted(capped.data(), capped.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + (9 * n) / 10, sorted.end());
    const double cap = sorted[static_cast<std::size_t>((9 * n) / 10)];
    if (cap > 0.0) capped = capped.cwiseMin(cap);
    const double total = capped.sum();
    int pick;
    if (total <= 0.0) {
      pick = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
    } else {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += capped[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(pick);
    d2 = d2.cwiseMin((X.rowwise() - X.row(pick)).rowwise().squaredNorm().eval());
  }
  return centers;
}

inline MixtureParams initial_params(const DataMatrix& X, int G, double delta,
                                    const FitControl& ctrl, Rng& rng) {
  const int p = static_cast<int>(X.cols());
  const Eigen::VectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
  Eigen::MatrixXd pooled =
      centered.transpose() * centered / static_cast<double>(X.rows());
  pooled = constrained_cov_update({pooled}, {1.0}, ctrl.gamma)[0];

  MixtureParams params;
  params.delta = delta;
  params.pi.resize(G + 1);
  const double pi0 = delta > 0.0 ? 0.02 : 0.0;
  params.pi[0] = pi0;
  for (int g = 1; g <= G; ++g) params.pi[g] = (1.0 - pi0) / G;
  const std::vector<int> centers = seed_centers(X, G, rng);
  params.means.resize(static_cast<std::size_t>(G));
  params.covs.resize(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g) {
    params.means[static_cast<std::size_t>(g)] =
        X.row(centers[static_cast<std::size_t>(g)]).transpose();
    params.covs[static_cast<std::size_t>(g)] = 0.5 * pooled;
  }
  // keep the shrunk matrices inside the eigenratio budget
  if (p > 1) {
    auto fixed = constrained_cov_update(
        std::vector<Eigen::MatrixXd>(params.covs.begin(), params.covs.end()),
        std::vector<double>(static_cast<std::size_t>(G), 1.0), ctrl.gamma);
    params.covs.assign(fixed.begin(), fixed.end());
  }
  return params;
}

struct EmOutcome {
  RimleFit fit;
  bool degenerate = false;
  std::string reason;
};

inline EmOutcome run_single_em(const DataMatrix& X, int G, double delta,
                               const FitControl& ctrl, Rng& rng) {
  const int p = static_cast<int>(X.cols());
  const double floor = component_weight_floor(p);

  EmOutcome out;
  MixtureParams params = initial_params(X, G, delta, ctrl, rng);
  Eigen::MatrixXd post;
  double loglik;
  try {
    loglik = posterior_loglik(X, params, post);
  } catch (const Error& e) {
    out.degenerate = true;
    out.reason = e.what();
    return out;
  }
  out.fit.loglikTrace.push_back(loglik);

  std::vector<Eigen::MatrixXd> scatters(static_cast<std::size_t>(G));
  std::vector<double> weightSums(static_cast<std::size_t>(G));
  bool converged = false;
  int iter = 0;
  for (; iter < ctrl.maxIter; ++iter) {
    // M-step
    for (int g = 0; g < G; ++g) {
      const double wg = post.col(g + 1).sum();
      if (wg < floor) {
        out.degenerate = true;
        out.reason = "component weight sum below floor";
        return out;
      }
      weightSums[static_cast<std::size_t>(g)] = wg;
      const Eigen::VectorXd mu = (X.transpose() * post.col(g + 1)) / wg;
      const Eigen::MatrixXd centered = X.rowwise() - mu.transpose();
      scatters[static_cast<std::size_t>(g)] =
          centered.transpose() * post.col(g + 1).asDiagonal() * centered;
      params.means[static_cast<std::size_t>(g)] = mu;
    }
    params.pi[0] = post.col(0).mean();
    for (int g = 0; g < G; ++g) params.pi[g + 1] = post.col(g + 1).mean();
    try {
      auto covs = constrained_cov_update(scatters, weightSums, ctrl.gamma);
      params.covs.assign(covs.begin(), covs.end());
    } catch (const Error& e) {
      out.degenerate = true;
      out.reason = e.what();
      return out;
    }

    // E-step at the updated parameters
    double next;
    try {
      next = posterior_loglik(X, params, post);
    } catch (const Error& e) {
      out.degenerate = true;
      out.reason = e.what();
      return out;
    }
    out.fit.loglikTrace.push_back(next);
    if (std::abs(next - loglik) < ctrl.tol * (1.0 + std::abs(next))) {
      loglik = next;
      converged = true;
      ++iter;
      break;
    }
    loglik = next;
  }

  out.fit.params = std::move(params);
  out.fit.posteriors = std::move(post);
  out.fit.pseudoLoglik = loglik;
  out.fit.meanNoisePosterior = out.fit.posteriors.col(0).mean();
  out.fit.iterations = iter;
  out.fit.converged = converged;
  return out;
}

}  // namespace detail

// Best-of-nRestarts ECM fit at fixed delta. Restarts whose components
// collapse below the effective weight floor (p+1) are discarded; if every
// restart collapses a DegenerateFitError identifying (G, delta) is thrown.
inline RimleFit rimle_em(const DataMatrix& X, int G, double delta,
                         const FitControl& ctrl, std::uint64_t seed) {
  check_data(X);
  check_control(ctrl);
  if (G < 1) throw ConfigError("G must be >= 1");
  if (delta < 0.0) throw ConfigError("delta must be nonnegative");

  detail::EmOutcome best;
  bool haveBest = false;
  for (int r = 0; r < ctrl.nRestarts; ++r) {
    Rng rng(derive_seed(seed, 0x5eedu, static_cast<std::uint64_t>(r)));
    detail::EmOutcome out = detail::run_single_em(X, G, delta, ctrl, rng);
    if (out.degenerate) continue;
    if (!haveBest || out.fit.pseudoLoglik > best.fit.pseudoLoglik) {
      best = std::move(out);
      haveBest = true;
    }
  }
  if (!haveBest)
    throw DegenerateFitError("all EM restarts degenerate at G=" + std::to_string(G) +
                             ", delta=" + std::to_string(delta));
  best.fit.discrepancy = detail::discrepancy_or_nan(best.fit, X);
  return best.fit;
}

}  // namespace otrimle
