// Data generation from a fitted improper-noise mixture. Noise rows are
// resampled from the original observations with probabilities proportional
// to their noise posteriors; regular rows are drawn from the fitted Gaussian
// components.
#pragma once

#include <algorithm>
#include <Eigen/Dense>
#include <vector>

#include "otrimle/rng.hpp"
#include "otrimle/types.hpp"

namespace otrimle {

// `provenance`, when given, receives the generating component per row
// (0 = resampled noise, 1..G = Gaussian component).
inline DataMatrix bootstrap_sample(const RimleFit& fit, const DataMatrix& X, int n,
                                   Rng& rng, std::vector<int>* provenance = nullptr) {
  check_data(X);
  const int G = fit.components();
  const int p = static_cast<int>(X.cols());
  const double pi0 = fit.params.pi[0];

  std::vector<double> noiseCum;
  double noiseTotal = 0.0;
  if (pi0 > 0.0) {
    noiseCum.resize(static_cast<std::size_t>(X.rows()));
    for (int i = 0; i < X.rows(); ++i) {
      noiseTotal += fit.posteriors(i, 0);
      noiseCum[static_cast<std::size_t>(i)] = noiseTotal;
    }
    if (!(noiseTotal > 0.0))
      throw InconsistentFitError(
          "positive noise proportion but all noise posteriors are zero");
  }

  std::vector<Eigen::MatrixXd> cholesky(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g) {
    Eigen::LLT<Eigen::MatrixXd> llt(fit.params.covs[static_cast<std::size_t>(g)]);
    if (llt.info() != Eigen::Success)
      throw DegenerateCovarianceError("fitted covariance is not positive definite");
    cholesky[static_cast<std::size_t>(g)] = llt.matrixL();
  }

  if (provenance) provenance->assign(static_cast<std::size_t>(n), 0);
  DataMatrix out(n, p);
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (u < pi0) {
      const double target = rng.uniform() * noiseTotal;
      const auto it = std::lower_bound(noiseCum.begin(), noiseCum.end(), target);
      const int idx = static_cast<int>(it - noiseCum.begin());
      out.row(i) = X.row(idx < X.rows() ? idx : static_cast<int>(X.rows()) - 1);
      if (provenance) (*provenance)[static_cast<std::size_t>(i)] = 0;
    } else {
      // component g with probability pi_g / (1 - pi0)
      const double v = rng.uniform() * (1.0 - pi0);
      double acc = 0.0;
      int g = G - 1;
      for (int h = 0; h < G; ++h) {
        acc += fit.params.pi[h + 1];
        if (v < acc) {
          g = h;
          break;
        }
      }
      for (int j = 0; j < p; ++j) z[j] = rng.normal();
      out.row(i) = (fit.params.means[static_cast<std::size_t>(g)] +
                    cholesky[static_cast<std::size_t>(g)] * z)
                       .transpose();
      if (provenance) (*provenance)[static_cast<std::size_t>(i)] = g + 1;
    }
  }
  return out;
}

}  // namespace otrimle
