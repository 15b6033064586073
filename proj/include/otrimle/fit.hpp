// Optimal tuning of the improper noise density delta. Fits the mixture at
// every grid value and keeps the candidate minimizing
// D(delta) + beta * pi0(delta), subject to a cap on the mean noise
// posterior; ties go to the smaller delta.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otrimle/discrepancy.hpp"
#include "otrimle/em.hpp"
#include "otrimle/types.hpp"

namespace otrimle {

// {0} plus nPoints log-spaced values between lo*fbar and fbar, where fbar is
// the median fitted single-Gaussian density of the data. Delta is only
// meaningful relative to the density scale of the data.
inline std::vector<double> default_delta_grid(const DataMatrix& X, const FitControl& ctrl,
                                              std::uint64_t seed, int nPoints = 30,
                                              double lo = 1e-3) {
  FitControl single = ctrl;
  single.nRestarts = 1;
  single.deltaGrid = {0.0};
  const RimleFit fit = rimle_em(X, 1, 0.0, single, seed);
  Eigen::VectorXd logf = mvn_logpdf(X, fit.params.means[0], fit.params.covs[0]);
  std::vector<double> values(logf.data(), logf.data() + logf.size());
  std::nth_element(values.begin(), values.begin() + values.size() / 2, values.end());
  const double fbar = std::exp(values[values.size() / 2]);

  std::vector<double> grid;
  grid.push_back(0.0);
  const double logLo = std::log(lo * fbar);
  const double logHi = std::log(fbar);
  for (int i = 0; i < nPoints; ++i) {
    const double t = nPoints == 1 ? 1.0 : static_cast<double>(i) / (nPoints - 1);
    grid.push_back(std::exp(logLo + t * (logHi - logLo)));
  }
  return grid;
}

namespace detail {

struct DeltaCandidate {
  double delta = 0.0;
  double objective = std::numeric_limits<double>::infinity();
  RimleFit fit;
  bool valid = false;
};

// Fit at one delta and score it; invalid when the fit degenerates, the
// discrepancy is undefined, or the noise cap is exceeded.
inline DeltaCandidate evaluate_delta(const DataMatrix& X, int G, double delta,
                                     const FitControl& ctrl, std::uint64_t emSeed) {
  DeltaCandidate cand;
  cand.delta = delta;
  try {
    cand.fit = rimle_em(X, G, delta, ctrl, emSeed);
  } catch (const Error&) {
    return cand;
  }
  if (cand.fit.meanNoisePosterior > ctrl.noiseCap) return cand;
  if (!std::isfinite(cand.fit.discrepancy)) return cand;
  cand.objective = cand.fit.discrepancy + ctrl.beta * cand.fit.params.pi[0];
  cand.valid = true;
  return cand;
}

}  // namespace detail

inline RimleFit otrimle_fit(const DataMatrix& X, int G, const FitControl& ctrl,
                            std::uint64_t seed) {
  check_data(X);
  check_control(ctrl);
  // Every delta candidate shares the same restart seeds, so the objective
  // comparison across the grid is not confounded by different inits.
  const std::uint64_t emSeed = derive_seed(seed, 0xf17u);
  std::vector<double> grid = ctrl.deltaGrid;
  if (grid.empty()) grid = default_delta_grid(X, ctrl, emSeed);

  detail::DeltaCandidate best;
  for (double delta : grid) {
    detail::DeltaCandidate cand = detail::evaluate_delta(X, G, delta, ctrl, emSeed);
    if (!cand.valid) continue;
    if (!best.valid || cand.objective < best.objective ||
        (cand.objective == best.objective && cand.delta < best.delta)) {
      best = std::move(cand);
    }
  }
  if (!best.valid)
    throw NoValidDeltaError("no admissible delta for G=" + std::to_string(G));

  if (ctrl.refineDelta && grid.size() > 2) {
    // Golden-section around the grid optimum; candidates are deterministic
    // because the restart seeds are shared.
    auto it = std::lower_bound(grid.begin(), grid.end(), best.delta);
    double lo = it == grid.begin() ? grid.front() : *(it - 1);
    double hi = (it + 1 == grid.end()) ? grid.back() : *(it + 1);
    const double invPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invPhi * (b - a);
    double x2 = a + invPhi * (b - a);
    detail::DeltaCandidate c1 = detail::evaluate_delta(X, G, x1, ctrl, emSeed);
    detail::DeltaCandidate c2 = detail::evaluate_delta(X, G, x2, ctrl, emSeed);
    for (int i = 0; i < ctrl.refineIter; ++i) {
      const double f1 = c1.valid ? c1.objective : std::numeric_limits<double>::infinity();
      const double f2 = c2.valid ? c2.objective : std::numeric_limits<double>::infinity();
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        c2 = std::move(c1);
        x1 = b - invPhi * (b - a);
        c1 = detail::evaluate_delta(X, G, x1, ctrl, emSeed);
      } else {
        a = x1;
        x1 = x2;
        c1 = std::move(c2);
        x2 = a + invPhi * (b - a);
        c2 = detail::evaluate_delta(X, G, x2, ctrl, emSeed);
      }
    }
    for (detail::DeltaCandidate* cand : {&c1, &c2}) {
      if (cand->valid && (cand->objective < best.objective ||
                          (cand->objective == best.objective && cand->delta < best.delta)))
        best = std::move(*cand);
    }
  }
  return best.fit;
}

}  // namespace otrimle
