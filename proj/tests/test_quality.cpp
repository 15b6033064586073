#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "otrimle/em.hpp"
#include "otrimle/quality.hpp"
#include "otrimle/rng.hpp"
#include "test_support.hpp"

using namespace otrimle;

TEST_SUITE_BEGIN("quality");

TEST_CASE("pc scores have unit weighted variance and are uncorrelated") {
  Rng rng(3);
  const int n = 200;
  DataMatrix X(n, 3);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 2.0 * rng.normal();
    X(i, 1) = 0.7 * rng.normal() + 0.5 * X(i, 0);
    X(i, 2) = 0.3 * rng.normal();
    w[i] = rng.uniform(0.1, 1.0);
  }
  const Eigen::MatrixXd scores = weighted_pc_scores(X, w);
  const double wSum = w.sum();
  for (int j = 0; j < 3; ++j) {
    const double mean = scores.col(j).dot(w) / wSum;
    CHECK(std::abs(mean) < 1e-10);
    const double var = scores.col(j).array().square().matrix().dot(w) / wSum;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
    for (int k = j + 1; k < 3; ++k) {
      const double cross =
          (scores.col(j).array() * scores.col(k).array()).matrix().dot(w) / wSum;
      CHECK(std::abs(cross) < 1e-8);
    }
  }
}

TEST_CASE("first pc aligns with the dominant axis") {
  Rng rng(7);
  const int n = 4000;
  DataMatrix X(n, 2);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 2.0 * rng.normal();  // variance 4
    X(i, 1) = rng.normal();        // variance 1
  }
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd scores = weighted_pc_scores(X, w);
  // fitted first axis: regression of the first score onto the raw variables
  const double wSum = w.sum();
  const Eigen::VectorXd mean = X.transpose() * w / wSum;
  const Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
  Eigen::VectorXd axis = centered.transpose() * scores.col(0) / wSum;
  axis.normalize();
  CHECK(std::abs(axis[0]) > 0.99);
}

TEST_CASE("rank-deficient weighted covariance is rejected") {
  DataMatrix X(10, 2);
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = i;
    X(i, 1) = 2.0 * i;  // perfectly collinear
  }
  CHECK_THROWS_AS(weighted_pc_scores(X, Eigen::VectorXd::Ones(10)),
                  DegenerateClusterError);
}

TEST_CASE("aggregation arithmetic") {
  SUBCASE("nonpositive statistics vanish") {
    Eigen::MatrixXd perPC(2, 3);
    perPC << -1.0, 0.0, -0.5, -2.0, -0.1, 0.0;
    const QualityBreakdown q = aggregate_quality(perPC);
    CHECK(q.perCluster[0] == 0.0);
    CHECK(q.perCluster[1] == 0.0);
    CHECK(q.total == 0.0);
  }
  SUBCASE("single positive entry") {
    Eigen::MatrixXd perPC(1, 1);
    perPC << 2.0;
    const QualityBreakdown q = aggregate_quality(perPC);
    CHECK(q.perCluster[0] == 4.0);
    CHECK(q.total == 4.0);
  }
  SUBCASE("totals recompute from the per-pc matrix") {
    Rng rng(19);
    Eigen::MatrixXd perPC(3, 4);
    for (int g = 0; g < 3; ++g)
      for (int j = 0; j < 4; ++j) perPC(g, j) = rng.normal();
    const QualityBreakdown q = aggregate_quality(perPC);
    double total = 0.0;
    for (int g = 0; g < 3; ++g) {
      double qg = 0.0;
      for (int j = 0; j < 4; ++j)
        if (perPC(g, j) > 0.0) qg += perPC(g, j) * perPC(g, j);
      qg /= 4.0;
      CHECK(std::abs(q.perCluster[g] - qg) <= 1e-12);
      total += qg * qg;
    }
    CHECK(std::abs(q.total - std::sqrt(total)) <= 1e-12);
  }
}

TEST_CASE("standardization against the reference table") {
  const CalibrationTable& table = test_support::small_table();
  SUBCASE("centering and scaling") {
    CHECK(standardized_q(table.meanQ[2], table.mGrid[2], table) == 0.0);
    CHECK(standardized_q(table.meanQ[2] + 2.0 * table.sdQ[2], table.mGrid[2], table) ==
          doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("log-linear interpolation between nodes") {
    const double m = std::exp(0.5 * (std::log(table.mGrid[1]) + std::log(table.mGrid[2])));
    const double expectedMean = 0.5 * (table.meanQ[1] + table.meanQ[2]);
    const double expectedSd = 0.5 * (table.sdQ[1] + table.sdQ[2]);
    CHECK(standardized_q(0.0, m, table) ==
          doctest::Approx(-expectedMean / expectedSd).epsilon(1e-12));
  }
  SUBCASE("clamped outside the grid") {
    CHECK(standardized_q(0.1, 1.0, table) == standardized_q(0.1, 5.0, table));
    CHECK(standardized_q(0.1, 1e6, table) == standardized_q(0.1, 1e4, table));
  }
  SUBCASE("monotone in the raw value") {
    double prev = -1e9;
    for (double q = 0.0; q < 0.3; q += 0.02) {
      const double s = standardized_q(q, 70.0, table);
      CHECK(s > prev);
      prev = s;
    }
  }
}

TEST_CASE("quality statistic is invariant under cluster relabelling") {
  Rng rng(23);
  const int n = 240;
  DataMatrix X(n, 2);
  for (int i = 0; i < n; ++i) {
    const int blob = i % 3;
    X(i, 0) = 6.0 * blob + rng.normal();
    X(i, 1) = (blob == 1 ? 5.0 : 0.0) + rng.normal();
  }
  FitControl ctrl;
  ctrl.nRestarts = 3;
  RimleFit fit = rimle_em(X, 3, 1e-5, ctrl, 77);
  const CalibrationTable& table = test_support::small_table();
  const QualityBreakdown q = quality_Q(fit, X, table, table.grid);

  // swap components 1 and 3
  RimleFit swapped = fit;
  std::swap(swapped.params.means[0], swapped.params.means[2]);
  std::swap(swapped.params.covs[0], swapped.params.covs[2]);
  std::swap(swapped.params.pi[1], swapped.params.pi[3]);
  swapped.posteriors.col(1).swap(swapped.posteriors.col(3));
  const QualityBreakdown q2 = quality_Q(swapped, X, table, table.grid);
  CHECK(std::abs(q.total - q2.total) <= 1e-12);
  CHECK(std::abs(q.perCluster[0] - q2.perCluster[2]) <= 1e-12);
  CHECK(std::abs(q.perCluster[2] - q2.perCluster[0]) <= 1e-12);
}

TEST_CASE("well-shaped single cluster scores low, split cluster scores high") {
  Rng rng(29);
  const int n = 600;
  DataMatrix X(n, 2);
  for (int i = 0; i < n; ++i) {
    const double shift = i % 2 == 0 ? -4.0 : 4.0;  // two separated blobs
    X(i, 0) = shift + rng.normal();
    X(i, 1) = rng.normal();
  }
  FitControl ctrl;
  ctrl.nRestarts = 3;
  const CalibrationTable& table = test_support::small_table();
  // G = 1 merges two blobs: strongly bimodal first PC, large Q
  const RimleFit merged = rimle_em(X, 1, 0.0, ctrl, 3);
  const QualityBreakdown bad = quality_Q(merged, X, table, table.grid);
  // G = 2 separates them: each cluster roughly Gaussian, small Q
  const RimleFit split = rimle_em(X, 2, 0.0, ctrl, 3);
  const QualityBreakdown good = quality_Q(split, X, table, table.grid);
  CHECK(bad.total > 10.0 * std::max(good.total, 1e-6));
}

TEST_SUITE_END();
