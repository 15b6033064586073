// Multivariate Gaussian evaluation and the mixture E-step quantities:
// improper mixture density and posterior membership probabilities.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "otrimle/math_util.hpp"
#include "otrimle/types.hpp"

namespace otrimle {

// Squared Mahalanobis distances of every row of X to (mu, cov).
inline Eigen::VectorXd mahalanobis_sq(const DataMatrix& X, const Eigen::VectorXd& mu,
                                      const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw DegenerateCovarianceError("covariance is not positive definite");
  Eigen::MatrixXd centered = X.transpose().colwise() - mu;  // p x n
  llt.matrixL().solveInPlace(centered);
  return centered.colwise().squaredNorm().transpose();
}

// log N(x; mu, cov) for every row of X.
inline Eigen::VectorXd mvn_logpdf(const DataMatrix& X, const Eigen::VectorXd& mu,
                                  const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw DegenerateCovarianceError("covariance is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  double logDet = 0.0;
  for (int j = 0; j < L.rows(); ++j) logDet += 2.0 * std::log(L(j, j));
  Eigen::MatrixXd centered = X.transpose().colwise() - mu;
  llt.matrixL().solveInPlace(centered);
  const double c = -0.5 * (static_cast<double>(X.cols()) * kLog2Pi + logDet);
  return (-0.5 * centered.colwise().squaredNorm().array() + c).transpose();
}

// pi0*delta + sum_g pi_g N(x; mu_g, cov_g).
inline double improper_density(const Eigen::VectorXd& x, const MixtureParams& params) {
  check_params(params);
  double f = params.pi[0] * params.delta;
  const DataMatrix row = x.transpose();
  for (int g = 0; g < params.components(); ++g) {
    const double pig = params.pi[g + 1];
    if (pig == 0.0) continue;
    f += pig * std::exp(mvn_logpdf(row, params.means[static_cast<std::size_t>(g)],
                                   params.covs[static_cast<std::size_t>(g)])[0]);
  }
  return f;
}

namespace detail {

// Log-space E-step shared by posteriors() and the EM loop. Fills `post`
// (n x (G+1), rows summing to 1) and returns the pseudo log-likelihood
// sum_i log f(x_i). Throws DegenerateModelError if some row has zero density.
inline double posterior_loglik(const DataMatrix& X, const MixtureParams& params,
                               Eigen::MatrixXd& post) {
  const int n = static_cast<int>(X.rows());
  const int G = params.components();
  post.resize(n, G + 1);
  const double noiseMass = params.pi[0] * params.delta;
  post.col(0).setConstant(noiseMass > 0.0
                              ? std::log(noiseMass)
                              : -std::numeric_limits<double>::infinity());
  for (int g = 0; g < G; ++g) {
    const double pig = params.pi[g + 1];
    if (pig > 0.0) {
      post.col(g + 1) = mvn_logpdf(X, params.means[static_cast<std::size_t>(g)],
                                   params.covs[static_cast<std::size_t>(g)])
                            .array() +
                        std::log(pig);
    } else {
      post.col(g + 1).setConstant(-std::numeric_limits<double>::infinity());
    }
  }
  const Eigen::VectorXd rowMax = post.rowwise().maxCoeff();
  if (!rowMax.allFinite())
    throw DegenerateModelError("mixture density is zero at an observation");
  post = (post.colwise() - rowMax).array().exp();
  const Eigen::VectorXd rowSum = post.rowwise().sum();
  post.array().colwise() /= rowSum.array();
  return (rowMax.array() + rowSum.array().log()).sum();
}

}  // namespace detail

// Posterior membership probabilities; entry (i,0) is the noise posterior.
inline Eigen::MatrixXd posteriors(const DataMatrix& X, const MixtureParams& params) {
  check_data(X);
  check_params(params);
  Eigen::MatrixXd post;
  detail::posterior_loglik(X, params, post);
  return post;
}

}  // namespace otrimle
