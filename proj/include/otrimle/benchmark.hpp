// Simulation benchmark harness: generates DGP datasets, runs the adequacy
// selection (beta = 0 and beta = 1/3) and the BIC/ICL baselines, and scores
// every run with the adjusted Rand index (with and without the rows the
// method classified as noise).
#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "otrimle/ari.hpp"
#include "otrimle/baseline.hpp"
#include "otrimle/csv.hpp"
#include "otrimle/dgp.hpp"
#include "otrimle/selection.hpp"

namespace otrimle {

enum class Method { Aotri = 0, Aotrib = 1, Gbic = 2, Gicl = 3 };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::Aotri:
      return "AOTRI";
    case Method::Aotrib:
      return "AOTRIB";
    case Method::Gbic:
      return "GBIC";
    case Method::Gicl:
      return "GICL";
  }
  return "?";
}

inline Method method_from_name(const std::string& name) {
  if (name == "AOTRI") return Method::Aotri;
  if (name == "AOTRIB") return Method::Aotrib;
  if (name == "GBIC") return Method::Gbic;
  if (name == "GICL") return Method::Gicl;
  throw ConfigError("unknown method: " + name);
}

struct BenchmarkRow {
  std::string method;
  int dgpId = 0;
  int run = 0;
  std::uint64_t runSeed = 0;
  int chosenG = 0;
  double ari = std::numeric_limits<double>::quiet_NaN();
  double ariNoiseless = std::numeric_limits<double>::quiet_NaN();
  double runtimeSec = 0.0;
  std::string failure;  // empty when the run succeeded
};

struct BenchmarkSettings {
  int Gmax = 6;
  int B = 20;
  double c = 2.0;
  double p0 = 0.05;
  int threads = 1;
  FitControl base;      // gamma, restarts, tolerances
  int deltaGridSize = 8;  // noise-density candidates per dataset (plus 0)
};

namespace detail {

// Posterior argmax per row; index 0 is the noise class (never attained when
// delta = 0, where the noise column is identically zero).
inline std::vector<int> hard_labels(const RimleFit& fit) {
  const int n = static_cast<int>(fit.posteriors.rows());
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int arg = 0;
    fit.posteriors.row(i).maxCoeff(&arg);
    labels[static_cast<std::size_t>(i)] = arg;
  }
  return labels;
}

inline double ari_excluding_noise(const std::vector<int>& truth,
                                  const std::vector<int>& predicted) {
  std::vector<int> a;
  std::vector<int> b;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == 0) continue;
    a.push_back(truth[i]);
    b.push_back(predicted[i]);
  }
  if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return adjusted_rand_index(a, b);
}

// DGP 1 and 2 are analysed on the raw scale; 3 and 4 are standardized first.
inline bool dgp_standardized(int dgpId) { return dgpId >= 3; }

inline BenchmarkRow run_one(Method method, const LabeledDataset& dataset,
                            const DataMatrix& prepared, const BenchmarkSettings& settings,
                            const CalibrationTable& table, std::uint64_t methodSeed) {
  BenchmarkRow row;
  row.method = method_name(method);
  const auto start = std::chrono::steady_clock::now();
  try {
    if (method == Method::Aotri || method == Method::Aotrib) {
      FitControl ctrl = settings.base;
      ctrl.beta = method == Method::Aotrib ? 1.0 / 3.0 : 0.0;
      if (ctrl.deltaGrid.empty())
        // one grid per dataset; bootstrap refits share it, which also keeps
        // the candidate set identical between observed and replicate fits
        ctrl.deltaGrid = default_delta_grid(prepared, ctrl, methodSeed,
                                            settings.deltaGridSize);
      SelectSettings sel;
      sel.Gmax = settings.Gmax;
      sel.B = settings.B;
      sel.c = settings.c;
      sel.p0 = settings.p0;
      sel.threads = settings.threads;
      std::vector<RimleFit> fits;
      const SelectionReport report =
          select_clusters(prepared, sel, ctrl, table, methodSeed, &fits);
      const int effectiveG = report.anyAdequate ? report.chosenG : report.fallbackG;
      if (effectiveG < 1) throw DegenerateFitError("no candidate G could be fitted");
      row.chosenG = effectiveG;
      const auto& fit = fits[static_cast<std::size_t>(effectiveG - 1)];
      const std::vector<int> labels = hard_labels(fit);
      row.ari = adjusted_rand_index(dataset.labels, labels);
      row.ariNoiseless = ari_excluding_noise(dataset.labels, labels);
    } else {
      FitControl ctrl = settings.base;
      ctrl.gamma = 1e6;  // loose regularization only
      std::vector<RimleFit> fits;
      const IcTable ic =
          gaussian_mixture_ic_baseline(prepared, settings.Gmax, ctrl, methodSeed, &fits);
      const int chosen = method == Method::Gbic ? ic.chosenBic : ic.chosenIcl;
      if (chosen < 1) throw DegenerateFitError("no candidate G could be fitted");
      row.chosenG = chosen;
      const auto& fit = fits[static_cast<std::size_t>(chosen - 1)];
      row.ari = adjusted_rand_index(dataset.labels, hard_labels(fit));
    }
  } catch (const Error& e) {
    row.failure = e.what();
  }
  row.runtimeSec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace detail

inline std::vector<BenchmarkRow> run_benchmark(const std::vector<int>& dgpIds,
                                               const std::vector<Method>& methods,
                                               int nRuns, const BenchmarkSettings& settings,
                                               const CalibrationTable& table,
                                               std::uint64_t masterSeed) {
  std::vector<BenchmarkRow> rows;
  for (int dgpId : dgpIds) {
    for (int run = 0; run < nRuns; ++run) {
      const std::uint64_t dataSeed =
          derive_seed(masterSeed, 0xd474u, static_cast<std::uint64_t>(dgpId),
                      static_cast<std::uint64_t>(run));
      const LabeledDataset dataset = generate_dgp(dgpId, dataSeed);
      const DataMatrix prepared = detail::dgp_standardized(dgpId)
                                      ? standardize_columns(dataset.data)
                                      : dataset.data;
      for (Method method : methods) {
        const std::uint64_t methodSeed =
            derive_seed(masterSeed, 0x3e7u, static_cast<std::uint64_t>(dgpId),
                        static_cast<std::uint64_t>(run) * 8 +
                            static_cast<std::uint64_t>(method));
        BenchmarkRow row =
            detail::run_one(method, dataset, prepared, settings, table, methodSeed);
        row.dgpId = dgpId;
        row.run = run;
        row.runSeed = dataSeed;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

inline void write_benchmark_csv(const std::vector<BenchmarkRow>& rows,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out.precision(17);
  out << "method,dgp,run,seed,chosenG,ari,ariNoiseless,runtimeSec,failure\n";
  for (const auto& row : rows) {
    out << row.method << ',' << row.dgpId << ',' << row.run << ',' << row.runSeed << ','
        << row.chosenG << ',';
    if (std::isfinite(row.ari)) out << row.ari;
    out << ',';
    if (std::isfinite(row.ariNoiseless)) out << row.ariNoiseless;
    out << ',' << row.runtimeSec << ',' << row.failure << "\n";
  }
}

// Per (dgp, method) means and chosen-G histograms. Rows are aggregated in
// their stored order so the summary is bit-reproducible from the CSV.
inline nlohmann::json summarize_benchmark(const std::vector<BenchmarkRow>& rows) {
  struct Acc {
    int count = 0;
    int failures = 0;
    double ariSum = 0.0;
    int ariNoiselessCount = 0;
    double ariNoiselessSum = 0.0;
    double runtimeSum = 0.0;
    std::map<int, int> chosenG;
  };
  std::map<std::pair<int, std::string>, Acc> acc;
  for (const auto& row : rows) {
    Acc& a = acc[{row.dgpId, row.method}];
    if (!row.failure.empty()) {
      ++a.failures;
      continue;
    }
    ++a.count;
    a.ariSum += row.ari;
    a.runtimeSum += row.runtimeSec;
    ++a.chosenG[row.chosenG];
    if (std::isfinite(row.ariNoiseless)) {
      ++a.ariNoiselessCount;
      a.ariNoiselessSum += row.ariNoiseless;
    }
  }
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [key, a] : acc) {
    nlohmann::json entry;
    entry["dgp"] = key.first;
    entry["method"] = key.second;
    entry["runs"] = a.count;
    entry["failures"] = a.failures;
    entry["meanAri"] = a.count > 0 ? nlohmann::json(a.ariSum / a.count)
                                   : nlohmann::json(nullptr);
    entry["meanAriNoiseless"] = a.ariNoiselessCount > 0
                                    ? nlohmann::json(a.ariNoiselessSum / a.ariNoiselessCount)
                                    : nlohmann::json(nullptr);
    entry["meanRuntimeSec"] = a.count > 0 ? nlohmann::json(a.runtimeSum / a.count)
                                          : nlohmann::json(nullptr);
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [g, cnt] : a.chosenG) hist[std::to_string(g)] = cnt;
    entry["chosenG"] = std::move(hist);
    j.push_back(std::move(entry));
  }
  return j;
}

}  // namespace otrimle
