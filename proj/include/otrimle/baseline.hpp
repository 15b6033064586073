// Plain Gaussian-mixture order selection by BIC and ICL, used as the
// comparison baseline. Covariances are fully free except for a very loose
// eigenvalue-ratio regularization.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "otrimle/em.hpp"
#include "otrimle/types.hpp"

namespace otrimle {

struct IcTable {
  std::vector<int> G;
  std::vector<double> loglik;
  std::vector<double> bic;
  std::vector<double> icl;
  std::vector<std::string> failure;  // empty string when the fit succeeded
  int chosenBic = 0;                 // 0 when no G could be fitted
  int chosenIcl = 0;
};

// k = (G-1) + pG + p(p+1)G/2 free parameters of a full-covariance mixture.
inline int free_parameter_count(int G, int p) {
  return (G - 1) + p * G + p * (p + 1) * G / 2;
}

inline IcTable gaussian_mixture_ic_baseline(const DataMatrix& X, int Gmax,
                                            const FitControl& ctrl, std::uint64_t seed,
                                            std::vector<RimleFit>* keepFits = nullptr) {
  check_data(X);
  if (Gmax < 1) throw ConfigError("Gmax must be >= 1");
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());

  IcTable table;
  if (keepFits) keepFits->assign(static_cast<std::size_t>(Gmax), RimleFit{});
  double bestBic = std::numeric_limits<double>::infinity();
  double bestIcl = std::numeric_limits<double>::infinity();
  for (int G = 1; G <= Gmax; ++G) {
    table.G.push_back(G);
    RimleFit fit;
    try {
      fit = rimle_em(X, G, 0.0, ctrl, derive_seed(seed, 0xb1cu, static_cast<std::uint64_t>(G)));
    } catch (const Error& e) {
      table.loglik.push_back(std::numeric_limits<double>::quiet_NaN());
      table.bic.push_back(std::numeric_limits<double>::quiet_NaN());
      table.icl.push_back(std::numeric_limits<double>::quiet_NaN());
      table.failure.emplace_back(e.what());
      continue;
    }
    const double bic = free_parameter_count(G, p) * std::log(static_cast<double>(n)) -
                       2.0 * fit.pseudoLoglik;
    double entropy = 0.0;
    for (int i = 0; i < n; ++i)
      for (int g = 1; g <= G; ++g) {
        const double w = fit.posteriors(i, g);
        if (w > 0.0) entropy -= w * std::log(w);
      }
    const double icl = bic + 2.0 * entropy;
    table.loglik.push_back(fit.pseudoLoglik);
    table.bic.push_back(bic);
    table.icl.push_back(icl);
    table.failure.emplace_back();
    if (keepFits) (*keepFits)[static_cast<std::size_t>(G - 1)] = std::move(fit);
    if (bic < bestBic) {
      bestBic = bic;
      table.chosenBic = G;
    }
    if (icl < bestIcl) {
      bestIcl = icl;
      table.chosenIcl = G;
    }
  }
  return table;
}

}  // namespace otrimle
