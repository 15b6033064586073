// Scalar special functions: Gaussian density/CDF/quantile and the
// chi-squared CDF/quantile via the regularized incomplete gamma function.
#pragma once

#include <cmath>
#include <limits>

#include "otrimle/errors.hpp"

namespace otrimle {

inline constexpr double kLog2Pi = 1.8378770664093454836;

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

namespace detail {

// Acklam's rational approximation to the standard normal quantile,
// polished below with two Newton steps.
inline double norm_quantile_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace detail

inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("norm_quantile: p must be in (0,1)");
  // Evaluate on the lower half and mirror, so that quantile(p) == -quantile(1-p)
  // holds exactly.
  if (p > 0.5) return -norm_quantile(1.0 - p);
  double x = detail::norm_quantile_approx(p);
  for (int i = 0; i < 2; ++i) {
    const double e = norm_cdf(x) - p;
    x -= e / norm_pdf(x);
  }
  return x;
}

namespace detail {

// Regularized lower incomplete gamma P(a, x); series for x < a+1, Lentz
// continued fraction otherwise.
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ConfigError("gamma_p: invalid arguments");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace detail

inline double chi2_cdf(double x, double df) {
  if (df <= 0.0) throw ConfigError("chi2_cdf: df must be positive");
  if (x <= 0.0) return 0.0;
  return detail::gamma_p(0.5 * df, 0.5 * x);
}

// Quantile by bracketing bisection plus Newton polish.
inline double chi2_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("chi2_quantile: p must be in (0,1)");
  double lo = 0.0, hi = df + 10.0;
  while (chi2_cdf(hi, df) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, df) < p)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double pdf = std::exp((0.5 * df - 1.0) * std::log(x) - 0.5 * x -
                                std::lgamma(0.5 * df) - 0.5 * df * M_LN2);
    if (pdf <= 0.0 || !std::isfinite(pdf)) break;
    const double step = (chi2_cdf(x, df) - p) / pdf;
    if (x - step > 0.0) x -= step;
  }
  return x;
}

}  // namespace otrimle
