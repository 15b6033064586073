#include <doctest.h>

#include <vector>

#include "otrimle/ari.hpp"
#include "otrimle/rng.hpp"

using namespace otrimle;

namespace {

// Pair-counting oracle: ARI = 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)) where
// a/b/c/d count pairs together in both / first only / second only / neither.
double pairwise_ari(const std::vector<int>& x, const std::vector<int>& y) {
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const bool sx = x[i] == x[j];
      const bool sy = y[i] == y[j];
      if (sx && sy)
        ++a;
      else if (sx)
        ++b;
      else if (sy)
        ++c;
      else
        ++d;
    }
  const double denom = (a + b) * (b + d) + (a + c) * (c + d);
  if (denom == 0.0) return 1.0;
  return 2.0 * (a * d - b * c) / denom;
}

}  // namespace

TEST_SUITE_BEGIN("ari");

TEST_CASE("identical partitions score one") {
  CHECK(adjusted_rand_index({1, 1, 2, 2, 3}, {1, 1, 2, 2, 3}) == 1.0);
  CHECK(adjusted_rand_index({0, 0, 0}, {5, 5, 5}) == 1.0);
  CHECK(adjusted_rand_index({2, 1, 1, 2}, {7, 4, 4, 7}) == 1.0);  // relabelled
}

TEST_CASE("the crossed two-by-two case scores minus one half") {
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {1, 2, 1, 2}) == doctest::Approx(-0.5));
}

TEST_CASE("symmetry and brute-force agreement on random partitions") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(11));  // n <= 12
    const int ka = 1 + static_cast<int>(rng.uniform_index(4));
    const int kb = 1 + static_cast<int>(rng.uniform_index(4));
    std::vector<int> x(static_cast<std::size_t>(n));
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      x[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(ka));
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(kb));
    }
    const double ab = adjusted_rand_index(x, y);
    CHECK(ab == doctest::Approx(pairwise_ari(x, y)).epsilon(1e-13));
    CHECK(ab == adjusted_rand_index(y, x));
  }
}

TEST_CASE("degenerate inputs") {
  CHECK_THROWS_AS(adjusted_rand_index({1}, {1}), ConfigError);
  CHECK_THROWS_AS(adjusted_rand_index({1, 2}, {1, 2, 3}), ConfigError);
}

TEST_SUITE_END();
