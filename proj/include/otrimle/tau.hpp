// Robust tau-estimator of location and scale. Location is a weighted mean
// with bisquare weights around the median; scale is a truncated second
// moment with the smooth bounded bisquare rho, divided by the Gaussian
// consistency constant E[rho_c(Z)] so the estimate is consistent for the
// standard deviation under normality.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "otrimle/errors.hpp"
#include "otrimle/math_util.hpp"

namespace otrimle {

namespace detail {

inline constexpr double kTauC1 = 4.5;
inline constexpr double kTauC2 = 3.0;
// 1 / Phi^{-1}(0.75): makes the MAD consistent for sigma under normality.
inline constexpr double kMadConsistency = 1.4826022185056018;

inline double bisquare_weight(double u, double c) {
  const double t = u / c;
  if (std::abs(t) >= 1.0) return 0.0;
  const double s = 1.0 - t * t;
  return s * s;
}

// Tukey bisquare rho: u^2/2 - u^4/(2c^2) + u^6/(6c^4) inside [-c, c],
// constant c^2/6 outside. Smooth and bounded.
inline double bisquare_rho(double u, double c) {
  const double a = std::abs(u);
  if (a >= c) return c * c / 6.0;
  const double u2 = u * u;
  return u2 / 2.0 - u2 * u2 / (2.0 * c * c) + u2 * u2 * u2 / (6.0 * c * c * c * c);
}

// E[Z^k 1(|Z| <= a)] for k = 2, 4, 6 via integration by parts.
inline double truncated_even_moment(int k, double a) {
  const double base = 2.0 * norm_cdf(a) - 1.0;
  const double tail = 2.0 * a * norm_pdf(a);
  switch (k) {
    case 2:
      return base - tail;
    case 4:
      return 3.0 * base - tail * (a * a + 3.0);
    case 6:
      return 15.0 * base - tail * (a * a * a * a + 5.0 * a * a + 15.0);
    default:
      throw ConfigError("unsupported moment order");
  }
}

// E[rho_c(Z)] for standard normal Z, in closed form.
inline double rho_consistency_constant(double c) {
  const double m2 = truncated_even_moment(2, c);
  const double m4 = truncated_even_moment(4, c);
  const double m6 = truncated_even_moment(6, c);
  const double tailProb = 2.0 * (1.0 - norm_cdf(c));
  return m2 / 2.0 - m4 / (2.0 * c * c) + m6 / (6.0 * c * c * c * c) +
         (c * c / 6.0) * tailProb;
}

inline double sorted_median(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace detail

// Returns (location, scale). Input order does not matter: values are sorted
// internally, so the result is exactly permutation invariant. A zero MAD
// yields (median, 0).
inline std::pair<double, double> tau_location_scale(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) throw ConfigError("tau estimator needs at least two values");

  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const double median = detail::sorted_median(sorted);

  std::vector<double> absDev(n);
  for (std::size_t i = 0; i < n; ++i) absDev[i] = std::abs(sorted[i] - median);
  std::sort(absDev.begin(), absDev.end());
  const double mad = detail::sorted_median(absDev);
  if (!(mad > 0.0)) return {median, 0.0};
  const double s0 = detail::kMadConsistency * mad;

  double wSum = 0.0;
  double wxSum = 0.0;
  for (double x : sorted) {
    const double w = detail::bisquare_weight((x - median) / s0, detail::kTauC1);
    wSum += w;
    wxSum += w * x;
  }
  const double location = wSum > 0.0 ? wxSum / wSum : median;

  static const double kappa = detail::rho_consistency_constant(detail::kTauC2);
  double rhoSum = 0.0;
  for (double x : sorted)
    rhoSum += detail::bisquare_rho((x - location) / s0, detail::kTauC2);
  const double scaleSq = s0 * s0 * rhoSum / (static_cast<double>(n) * kappa);
  return {location, std::sqrt(scaleSq)};
}

}  // namespace otrimle
