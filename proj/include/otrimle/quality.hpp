// The cluster quality statistic Q(G): per-cluster weighted principal
// component scores, per-PC standardized symmetric-unimodality discrepancies,
// aggregated so that a substantial problem in any single cluster dominates.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "otrimle/calibration.hpp"
#include "otrimle/kde.hpp"
#include "otrimle/types.hpp"

namespace otrimle {

// Weighted PCA scores: weighted mean removed, projected on the eigenvectors
// of the (biased) weighted covariance, each column rescaled to weighted mean
// zero and weighted variance one. Columns ordered by descending eigenvalue.
inline Eigen::MatrixXd weighted_pc_scores(const DataMatrix& subdata,
                                          const Eigen::VectorXd& weights) {
  const int n = static_cast<int>(subdata.rows());
  const int p = static_cast<int>(subdata.cols());
  if (weights.size() != n) throw ConfigError("weights do not match the data");
  if ((weights.array() < 0.0).any()) throw ConfigError("weights must be nonnegative");
  const double wSum = weights.sum();
  if (!(wSum > p)) throw DegenerateClusterError("weight sum must exceed p");

  const Eigen::VectorXd mean = subdata.transpose() * weights / wSum;
  const Eigen::MatrixXd centered = subdata.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * weights.asDiagonal() * centered / wSum;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw DegenerateClusterError("weighted covariance eigendecomposition failed");
  const double maxEig = es.eigenvalues().maxCoeff();
  if (!(maxEig > 0.0) ||
      es.eigenvalues().minCoeff() <= 1e-12 * std::max(maxEig, 1.0))
    throw DegenerateClusterError("weighted covariance is rank deficient");

  Eigen::MatrixXd scores(n, p);
  for (int j = 0; j < p; ++j) {
    // Eigen sorts ascending; emit descending with a fixed sign convention.
    Eigen::VectorXd axis = es.eigenvectors().col(p - 1 - j);
    int argmax = 0;
    axis.cwiseAbs().maxCoeff(&argmax);
    if (axis[argmax] < 0.0) axis = -axis;
    Eigen::VectorXd col = centered * axis;
    const double colMean = col.dot(weights) / wSum;
    col.array() -= colMean;
    const double colVar = col.array().square().matrix().dot(weights) / wSum;
    if (!(colVar > 0.0)) throw DegenerateClusterError("degenerate principal component");
    scores.col(j) = col / std::sqrt(colVar);
  }
  return scores;
}

struct QualityBreakdown {
  Eigen::MatrixXd perPC;       // G x p standardized statistics Q_jg
  Eigen::VectorXd perCluster;  // Q_g
  double total = 0.0;          // Q(G)
};

// Q_g = (1/p) sum_j Q_jg^2 1(Q_jg > 0);  Q(G) = sqrt(sum_g Q_g^2).
inline QualityBreakdown aggregate_quality(const Eigen::MatrixXd& perPC) {
  const int G = static_cast<int>(perPC.rows());
  const int p = static_cast<int>(perPC.cols());
  QualityBreakdown out;
  out.perPC = perPC;
  out.perCluster.resize(G);
  double total = 0.0;
  for (int g = 0; g < G; ++g) {
    double qg = 0.0;
    for (int j = 0; j < p; ++j) {
      const double v = perPC(g, j);
      if (v > 0.0) qg += v * v;
    }
    qg /= p;
    out.perCluster[g] = qg;
    total += qg * qg;
  }
  out.total = std::sqrt(total);
  return out;
}

inline QualityBreakdown quality_Q(const RimleFit& fit, const DataMatrix& X,
                                  const CalibrationTable& table, const EvalGrid& grid) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const int G = fit.components();
  if (fit.posteriors.rows() != n || fit.posteriors.cols() != G + 1)
    throw ConfigError("posterior matrix does not match the data");
  if (table.grid.q != grid.q)
    throw ConfigError("calibration table was built for a different grid");

  Eigen::MatrixXd perPC(G, p);
  for (int g = 0; g < G; ++g) {
    const Eigen::VectorXd weights = fit.posteriors.col(g + 1);
    const double wSum = weights.sum();
    if (wSum < component_weight_floor(p))
      throw DegenerateClusterError("cluster " + std::to_string(g + 1) +
                                   " has too little weight for the quality statistic");
    const double m = n * fit.params.pi[g + 1];
    try {
      if (p == 1) {
        const double mean = X.col(0).dot(weights) / wSum;
        Eigen::VectorXd col = X.col(0).array() - mean;
        const double var = col.array().square().matrix().dot(weights) / wSum;
        if (!(var > 0.0)) throw DegenerateClusterError("zero weighted variance");
        col /= std::sqrt(var);
        const double qRaw = symmetrize_discrepancy(kde_weighted(col, weights, grid), grid);
        perPC(g, 0) = standardized_q(qRaw, m, table);
      } else {
        const Eigen::MatrixXd scores = weighted_pc_scores(X, weights);
        for (int j = 0; j < p; ++j) {
          const double qRaw =
              symmetrize_discrepancy(kde_weighted(scores.col(j), weights, grid), grid);
          perPC(g, j) = standardized_q(qRaw, m, table);
        }
      }
    } catch (const DegenerateClusterError& e) {
      throw DegenerateClusterError("cluster " + std::to_string(g + 1) + ": " + e.what());
    }
  }
  return aggregate_quality(perPC);
}

}  // namespace otrimle
