// Core domain types: data matrix, mixture parameters with an improper
// uniform noise component, fit results and fitting controls.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "otrimle/errors.hpp"

namespace otrimle {

// n observations by p variables.
using DataMatrix = Eigen::MatrixXd;

inline void check_data(const DataMatrix& data) {
  if (data.rows() < 1 || data.cols() < 1)
    throw ConfigError("data must have at least one row and one column");
  if (!data.allFinite()) throw ConfigError("data contains non-finite values");
}

// Gaussian mixture with a constant improper noise density `delta`.
// pi has G+1 entries; pi[0] is the noise proportion.
struct MixtureParams {
  Eigen::VectorXd pi;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
  double delta = 0.0;

  int components() const { return static_cast<int>(means.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
};

inline void check_params(const MixtureParams& params) {
  const int G = params.components();
  if (G < 1) throw ConfigError("mixture needs at least one component");
  if (params.pi.size() != G + 1) throw ConfigError("pi must have G+1 entries");
  if (params.delta < 0.0) throw ConfigError("delta must be nonnegative");
  double sum = 0.0;
  for (int g = 0; g <= G; ++g) {
    if (params.pi[g] < -1e-12 || params.pi[g] > 1.0 + 1e-12)
      throw ConfigError("mixture proportions must lie in [0,1]");
    sum += params.pi[g];
  }
  if (std::abs(sum - 1.0) > 1e-8) throw ConfigError("mixture proportions must sum to 1");
  const int p = params.dim();
  for (int g = 0; g < G; ++g) {
    if (params.means[static_cast<std::size_t>(g)].size() != p ||
        params.covs[static_cast<std::size_t>(g)].rows() != p ||
        params.covs[static_cast<std::size_t>(g)].cols() != p)
      throw ConfigError("component dimensions are inconsistent");
  }
}

struct RimleFit {
  MixtureParams params;
  Eigen::MatrixXd posteriors;  // n x (G+1), column 0 = noise
  double pseudoLoglik = -std::numeric_limits<double>::infinity();
  // Kolmogorov-type distance of weighted Mahalanobis distances to chi^2_p;
  // NaN when undefined for this fit.
  double discrepancy = std::numeric_limits<double>::quiet_NaN();
  double meanNoisePosterior = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loglikTrace;

  int components() const { return params.components(); }
};

struct FitControl {
  double gamma = 20.0;   // eigenvalue-ratio bound across all covariances
  int maxIter = 200;
  double tol = 1e-6;     // relative pseudo log-likelihood change
  int nRestarts = 10;
  // Candidate improper noise densities. Empty means: derive a data-driven
  // grid (0 plus 30 log-spaced values under the median fitted single-Gaussian
  // density). A non-empty grid must be ascending, nonnegative and contain 0.
  std::vector<double> deltaGrid;
  double beta = 0.0;     // weight of the noise proportion in the delta objective
  double noiseCap = 0.5; // maximum admissible mean noise posterior
  bool refineDelta = false;  // golden-section refinement around the grid optimum
  int refineIter = 12;
};

inline void check_control(const FitControl& ctrl) {
  if (ctrl.gamma < 1.0) throw ConfigError("gamma must be >= 1");
  if (ctrl.tol <= 0.0) throw ConfigError("tol must be positive");
  if (ctrl.maxIter < 1) throw ConfigError("maxIter must be >= 1");
  if (ctrl.nRestarts < 1) throw ConfigError("nRestarts must be >= 1");
  if (ctrl.beta < 0.0) throw ConfigError("beta must be nonnegative");
  if (ctrl.noiseCap <= 0.0 || ctrl.noiseCap > 1.0)
    throw ConfigError("noiseCap must be in (0,1]");
  if (!ctrl.deltaGrid.empty()) {
    bool hasZero = false;
    double prev = -1.0;
    for (double d : ctrl.deltaGrid) {
      if (d < 0.0) throw ConfigError("deltaGrid values must be nonnegative");
      if (d <= prev) throw ConfigError("deltaGrid must be strictly ascending");
      if (d == 0.0) hasZero = true;
      prev = d;
    }
    if (!hasZero) throw ConfigError("deltaGrid must contain 0");
  }
}

// Effective-weight floor below which a component counts as collapsed.
inline double component_weight_floor(int p) { return static_cast<double>(p + 1); }

}  // namespace otrimle
