#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "otrimle/dgp.hpp"

using namespace otrimle;

namespace {

std::map<int, int> label_counts(const LabeledDataset& ds) {
  std::map<int, int> counts;
  for (int v : ds.labels) ++counts[v];
  return counts;
}

}  // namespace

TEST_SUITE_BEGIN("dgp");

TEST_CASE("dgp1 shape, labels and moments") {
  const LabeledDataset ds = generate_dgp(1, 12);
  CHECK(ds.data.rows() == 1000);
  CHECK(ds.data.cols() == 10);
  CHECK(ds.trueG == 3);
  const auto counts = label_counts(ds);
  CHECK(counts.size() == 3);
  for (const auto& [label, count] : counts) {
    CHECK(label >= 1);
    CHECK(label <= 3);
    // multinomial(1000, 1/3): +-5 sd
    CHECK(count > 333 - 75);
    CHECK(count < 333 + 75);
  }
  // cluster means in the two active variables
  Eigen::Vector2d sum[4] = {};
  int n[4] = {};
  for (int i = 0; i < 1000; ++i) {
    sum[ds.labels[static_cast<std::size_t>(i)]] += ds.data.row(i).head(2);
    ++n[ds.labels[static_cast<std::size_t>(i)]];
  }
  CHECK((sum[1] / n[1] - Eigen::Vector2d(-3, 0)).norm() < 0.35);
  CHECK((sum[2] / n[2] - Eigen::Vector2d(8, 0)).norm() < 0.45);
  CHECK((sum[3] / n[3] - Eigen::Vector2d(5, 9)).norm() < 0.45);
  // filler variables are roughly standard normal
  for (int j = 2; j < 10; ++j) {
    CHECK(std::abs(ds.data.col(j).mean()) < 0.12);
    const double var = (ds.data.col(j).array() - ds.data.col(j).mean()).square().mean();
    CHECK(var == doctest::Approx(1.0).epsilon(0.15));
  }
}

TEST_CASE("dgp2 equals dgp1 except one gross outlier cell") {
  const LabeledDataset a = generate_dgp(1, 77);
  const LabeledDataset b = generate_dgp(2, 77);
  REQUIRE(a.data.rows() == b.data.rows());
  int diffs = 0;
  int diffRow = -1;
  for (int i = 0; i < a.data.rows(); ++i)
    for (int j = 0; j < a.data.cols(); ++j)
      if (a.data(i, j) != b.data(i, j)) {
        ++diffs;
        diffRow = i;
        CHECK(j == 2);
        CHECK(b.data(i, j) == 1000.0);
      }
  CHECK(diffs == 1);
  CHECK(b.labels[static_cast<std::size_t>(diffRow)] == 1);
  CHECK(a.labels == b.labels);
}

TEST_CASE("dgp3 shape") {
  const LabeledDataset ds = generate_dgp(3, 3);
  CHECK(ds.data.rows() == 2000);
  CHECK(ds.data.cols() == 20);
  CHECK(ds.trueG == 3);
  // heavy tails within a cluster: far more 4-sigma deviations than a
  // Gaussian sample of this size would produce
  std::vector<double> cluster1;
  for (int i = 0; i < 2000; ++i)
    if (ds.labels[static_cast<std::size_t>(i)] == 1) cluster1.push_back(ds.data(i, 0));
  std::vector<double> sorted(cluster1);
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::vector<double> dev;
  for (double v : cluster1) dev.push_back(std::abs(v - median));
  std::sort(dev.begin(), dev.end());
  const double scale = 1.4826 * dev[dev.size() / 2];
  int farTail = 0;
  for (double v : dev)
    if (v > 4.0 * scale) ++farTail;
  CHECK(farTail >= 5);  // expectation is ~13 for t3, ~0 for a Gaussian
}

TEST_CASE("dgp4 composition is exact") {
  const LabeledDataset ds = generate_dgp(4, 9);
  CHECK(ds.data.rows() == 660);
  CHECK(ds.data.cols() == 6);
  CHECK(ds.trueG == 5);
  const auto counts = label_counts(ds);
  CHECK(counts.at(1) == 250);
  CHECK(counts.at(2) == 150);
  CHECK(counts.at(3) == 70);
  CHECK(counts.at(4) == 70);
  CHECK(counts.at(5) == 100);
  CHECK(counts.at(0) == 20);
  // the tight uniform cluster lives in a boxed neighbourhood of its centre
  const Eigen::Vector4d centre(2, 0, 4, 4);
  for (int i = 0; i < 660; ++i)
    if (ds.labels[static_cast<std::size_t>(i)] == 5)
      CHECK((ds.data.row(i).head(4).transpose() - centre).cwiseAbs().maxCoeff() <= 0.2);
}

TEST_CASE("generation is deterministic per seed") {
  const LabeledDataset a = generate_dgp(4, 1234);
  const LabeledDataset b = generate_dgp(4, 1234);
  CHECK((a.data - b.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.labels == b.labels);
  const LabeledDataset c = generate_dgp(4, 1235);
  CHECK((a.data - c.data).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("json dgp specs round trip through the generator") {
  nlohmann::json j = {
      {"name", "twoblob"},
      {"n", 100},
      {"p", 3},
      {"activeDims", 2},
      {"trueG", 2},
      {"fillers", nlohmann::json::array({{{"family", "t"}, {"df", 2.0}}})},
      {"components",
       nlohmann::json::array(
           {{{"family", "gaussian"},
             {"label", 1},
             {"size", 60},
             {"mean", {0.0, 0.0}},
             {"cov", {{1.0, 0.0}, {0.0, 1.0}}}},
            {{"family", "uniform"},
             {"label", 2},
             {"size", 40},
             {"center", {5.0, 5.0}},
             {"range", 1.0}}})}};
  const DgpSpec spec = dgp_spec_from_json(j);
  const LabeledDataset ds = generate(spec, 5);
  CHECK(ds.data.rows() == 100);
  CHECK(ds.data.cols() == 3);
  const auto counts = label_counts(ds);
  CHECK(counts.at(1) == 60);
  CHECK(counts.at(2) == 40);
  for (int i = 0; i < 100; ++i)
    if (ds.labels[static_cast<std::size_t>(i)] == 2) {
      CHECK(ds.data(i, 0) >= 4.5);
      CHECK(ds.data(i, 0) <= 5.5);
    }
  nlohmann::json bad = j;
  bad["components"][0]["size"] = 70;  // sizes no longer sum to n
  CHECK_THROWS_AS(dgp_spec_from_json(bad), ConfigError);
}

TEST_SUITE_END();
