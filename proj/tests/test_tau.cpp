#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "otrimle/rng.hpp"
#include "otrimle/tau.hpp"

using namespace otrimle;

TEST_SUITE_BEGIN("tau");

TEST_CASE("constant values give zero scale at the median") {
  const auto [loc, scale] = tau_location_scale({5.0, 5.0, 5.0, 5.0});
  CHECK(loc == 5.0);
  CHECK(scale == 0.0);
}

TEST_CASE("symmetric values centre at zero") {
  const auto [loc, scale] = tau_location_scale({-1.0, 0.0, 1.0});
  CHECK(loc == 0.0);
  CHECK(scale > 0.0);
}

TEST_CASE("consistency constant matches numerical quadrature") {
  // midpoint rule over [-8, 8] against the closed form
  const double c = detail::kTauC2;
  const int steps = 400000;
  double sum = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double z = -8.0 + 16.0 * (i + 0.5) / steps;
    sum += detail::bisquare_rho(z, c) * norm_pdf(z);
  }
  sum *= 16.0 / steps;
  CHECK(detail::rho_consistency_constant(c) == doctest::Approx(sum).epsilon(1e-8));
}

TEST_CASE("gaussian consistency by simulation") {
  Rng rng(99);
  const int n = 30000;
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = rng.normal();
  const auto [loc, scale] = tau_location_scale(values);
  CHECK(std::abs(loc) < 0.02);
  CHECK(std::abs(scale - 1.0) < 0.03);
}

TEST_CASE("location-scale equivariance") {
  Rng rng(17);
  std::vector<double> values(200);
  for (auto& v : values) v = rng.normal() + 0.3 * rng.uniform();
  const auto [loc, scale] = tau_location_scale(values);
  const double a = 2.75;
  const double b = -13.0;
  std::vector<double> transformed(values);
  for (auto& v : transformed) v = a * v + b;
  const auto [loc2, scale2] = tau_location_scale(transformed);
  CHECK(loc2 == doctest::Approx(a * loc + b).epsilon(1e-10));
  CHECK(scale2 == doctest::Approx(a * scale).epsilon(1e-10));
}

TEST_CASE("permutation invariance is exact") {
  Rng rng(23);
  std::vector<double> values(101);
  for (auto& v : values) v = rng.normal();
  const auto [loc, scale] = tau_location_scale(values);
  std::vector<double> shuffled(values);
  for (std::size_t i = shuffled.size() - 1; i > 0; --i)
    std::swap(shuffled[i], shuffled[rng.uniform_index(i + 1)]);
  const auto [loc2, scale2] = tau_location_scale(shuffled);
  CHECK(loc == loc2);
  CHECK(scale == scale2);
}

TEST_CASE("outliers barely move the estimate") {
  Rng rng(31);
  std::vector<double> values(1000);
  for (auto& v : values) v = rng.normal();
  auto [cleanLoc, cleanScale] = tau_location_scale(values);
  for (int i = 0; i < 50; ++i) values[static_cast<std::size_t>(i)] = 1000.0;
  const auto [loc, scale] = tau_location_scale(values);
  CHECK(std::abs(loc - cleanLoc) < 0.1);
  CHECK(std::abs(scale - cleanScale) < 0.15);
}

TEST_SUITE_END();
