// Monte-Carlo reference moments of the symmetric-unimodality discrepancy
// under i.i.d. standard Gaussian samples, tabulated over effective sample
// sizes and interpolated in log(m). Used to standardize raw discrepancies so
// that clusters of different sizes are comparable.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "otrimle/kde.hpp"
#include "otrimle/parallel.hpp"
#include "otrimle/rng.hpp"

namespace otrimle {

struct CalibrationTable {
  EvalGrid grid;
  std::vector<double> mGrid;
  std::vector<double> meanQ;
  std::vector<double> sdQ;
  int reps = 0;
  std::uint64_t seed = 0;

  bool empty() const { return mGrid.empty(); }
};

inline void check_table(const CalibrationTable& table) {
  const std::size_t k = table.mGrid.size();
  if (k < 2) throw ConfigError("calibration table needs at least two nodes");
  if (table.meanQ.size() != k || table.sdQ.size() != k)
    throw ConfigError("calibration table columns are inconsistent");
  for (std::size_t i = 0; i < k; ++i) {
    if (!(table.sdQ[i] > 0.0)) throw ConfigError("calibration sd must be positive");
    if (table.meanQ[i] < 0.0) throw ConfigError("calibration mean must be nonnegative");
    if (i > 0 && table.mGrid[i] <= table.mGrid[i - 1])
      throw ConfigError("calibration m grid must be strictly increasing");
  }
}

inline std::vector<double> default_calibration_m_grid() {
  return {5, 8, 12, 20, 35, 60, 100, 175, 300, 550, 1000, 1800, 3200, 5600, 10000};
}

namespace detail {

// One reference replicate: m standard Gaussian draws with unit weights,
// standardized, passed through the same KDE pipeline as real clusters.
inline double reference_discrepancy(int m, const EvalGrid& grid, Rng& rng) {
  Eigen::VectorXd values(m);
  for (int i = 0; i < m; ++i) values[i] = rng.normal();
  const double mean = values.mean();
  const double var = (values.array() - mean).square().mean();
  if (!(var > 0.0)) return 0.0;
  values = (values.array() - mean) / std::sqrt(var);
  const Eigen::VectorXd weights = Eigen::VectorXd::Ones(m);
  return symmetrize_discrepancy(kde_weighted(values, weights, grid), grid);
}

inline std::pair<double, double> calibrate_node(int m, int reps, const EvalGrid& grid,
                                                std::uint64_t seed, int threads = 1) {
  std::vector<double> q(static_cast<std::size_t>(reps));
  parallel_for(reps, threads, [&](int r) {
    Rng rng(derive_seed(seed, 0xca1u, static_cast<std::uint64_t>(m),
                        static_cast<std::uint64_t>(r)));
    q[static_cast<std::size_t>(r)] = reference_discrepancy(m, grid, rng);
  });
  double mean = 0.0;
  for (double v : q) mean += v;
  mean /= reps;
  double ss = 0.0;
  for (double v : q) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (reps - 1));
  return {mean, sd};
}

}  // namespace detail

inline CalibrationTable calibrate(const std::vector<double>& mGrid, int reps,
                                  const EvalGrid& grid, std::uint64_t seed,
                                  int threads = 1) {
  if (reps < 500) throw ConfigError("calibration needs at least 500 replicates");
  if (mGrid.size() < 2 || mGrid.front() > 5.0 || mGrid.back() < 1e4)
    throw ConfigError("calibration m grid must cover [5, 1e4]");
  CalibrationTable table;
  table.grid = grid;
  table.mGrid = mGrid;
  table.meanQ.resize(mGrid.size());
  table.sdQ.resize(mGrid.size());
  table.reps = reps;
  table.seed = seed;
  for (std::size_t i = 0; i < mGrid.size(); ++i) {
    const int m = static_cast<int>(std::lround(mGrid[i]));
    auto [mean, sd] = detail::calibrate_node(m, reps, grid, seed, threads);
    table.meanQ[i] = mean;
    table.sdQ[i] = sd;
  }
  check_table(table);
  return table;
}

// (qRaw - E_m) / sd_m with both moments interpolated linearly in log(m);
// m outside the grid clamps to the nearest node.
inline double standardized_q(double qRaw, double m, const CalibrationTable& table) {
  if (!(m > 0.0)) throw ConfigError("effective size m must be positive");
  const auto& mg = table.mGrid;
  double mean;
  double sd;
  if (m <= mg.front()) {
    mean = table.meanQ.front();
    sd = table.sdQ.front();
  } else if (m >= mg.back()) {
    mean = table.meanQ.back();
    sd = table.sdQ.back();
  } else {
    std::size_t hi = 1;
    while (mg[hi] < m) ++hi;
    const double t = (std::log(m) - std::log(mg[hi - 1])) /
                     (std::log(mg[hi]) - std::log(mg[hi - 1]));
    mean = (1.0 - t) * table.meanQ[hi - 1] + t * table.meanQ[hi];
    sd = (1.0 - t) * table.sdQ[hi - 1] + t * table.sdQ[hi];
  }
  return (qRaw - mean) / sd;
}

inline nlohmann::json table_to_json(const CalibrationTable& table) {
  nlohmann::json j;
  j["schema"] = "otrimle-calibration/1";
  j["q"] = table.grid.q;
  j["probs"] = std::vector<double>(table.grid.probs.data(),
                                   table.grid.probs.data() + table.grid.probs.size());
  j["mGrid"] = table.mGrid;
  j["meanQ"] = table.meanQ;
  j["sdQ"] = table.sdQ;
  j["reps"] = table.reps;
  j["seed"] = table.seed;
  return j;
}

inline CalibrationTable table_from_json(const nlohmann::json& j) {
  if (!j.contains("schema") || j.at("schema").get<std::string>() != "otrimle-calibration/1")
    throw ParseError("unrecognized calibration table schema");
  CalibrationTable table;
  const std::vector<double> probs = j.at("probs").get<std::vector<double>>();
  table.grid = EvalGrid::from_probs(
      Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<int>(probs.size())));
  if (table.grid.q != j.at("q").get<int>())
    throw ParseError("calibration table q does not match its probabilities");
  table.mGrid = j.at("mGrid").get<std::vector<double>>();
  table.meanQ = j.at("meanQ").get<std::vector<double>>();
  table.sdQ = j.at("sdQ").get<std::vector<double>>();
  table.reps = j.at("reps").get<int>();
  table.seed = j.at("seed").get<std::uint64_t>();
  check_table(table);
  return table;
}

inline void save_table(const CalibrationTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write calibration table: " + path);
  out << table_to_json(table).dump(2) << "\n";
}

inline CalibrationTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open calibration table: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("calibration table is not valid JSON: ") + e.what());
  }
  return table_from_json(j);
}

}  // namespace otrimle
