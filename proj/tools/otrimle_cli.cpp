// Command-line front end: data ingestion, fitting, cluster-count selection,
// reference-table calibration, simulation and benchmarking.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "otrimle/otrimle.hpp"

namespace {

constexpr int kExitNoAdequate = 3;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitIo = 74;

struct CommonIo {
  std::string input;
  char delimiter = ',';
  bool header = false;
  bool standardize = false;
};

otrimle::DataMatrix load_input(const CommonIo& io) {
  otrimle::CsvOptions opt;
  opt.delimiter = io.delimiter;
  opt.header = io.header;
  otrimle::DataMatrix data = otrimle::load_csv(io.input, opt);
  if (io.standardize) data = otrimle::standardize_columns(data);
  return data;
}

std::vector<double> parse_double_list(const std::string& spec) {
  std::vector<double> values;
  std::stringstream ss(spec);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    values.push_back(std::stod(cell));
  }
  return values;
}

// Loads the table from the given path, or generates a deterministic default.
otrimle::CalibrationTable resolve_table(const std::string& path, int threads) {
  if (!path.empty()) return otrimle::load_table(path);
  std::cerr << "note: no --calibration-file given; generating the default "
               "reference table (seed 0xca11b, 800 replicates)\n";
  return otrimle::calibrate(otrimle::default_calibration_m_grid(), 800,
                            otrimle::EvalGrid::standard(), 0xca11b, threads);
}

nlohmann::json fit_to_json(const otrimle::RimleFit& fit) {
  nlohmann::json j;
  j["schema"] = "otrimle-fit/1";
  j["G"] = fit.components();
  j["delta"] = fit.params.delta;
  j["pi"] = std::vector<double>(fit.params.pi.data(),
                                fit.params.pi.data() + fit.params.pi.size());
  nlohmann::json means = nlohmann::json::array();
  nlohmann::json covs = nlohmann::json::array();
  for (int g = 0; g < fit.components(); ++g) {
    const auto& mu = fit.params.means[static_cast<std::size_t>(g)];
    means.push_back(std::vector<double>(mu.data(), mu.data() + mu.size()));
    const auto& cov = fit.params.covs[static_cast<std::size_t>(g)];
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < cov.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < cov.cols(); ++c) row.push_back(cov(r, c));
      rows.push_back(std::move(row));
    }
    covs.push_back(std::move(rows));
  }
  j["means"] = std::move(means);
  j["covs"] = std::move(covs);
  j["pseudoLoglik"] = fit.pseudoLoglik;
  j["discrepancy"] = std::isfinite(fit.discrepancy)
                         ? nlohmann::json(fit.discrepancy)
                         : nlohmann::json(nullptr);
  j["meanNoisePosterior"] = fit.meanNoisePosterior;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  std::vector<int> labels(static_cast<std::size_t>(fit.posteriors.rows()));
  for (int i = 0; i < fit.posteriors.rows(); ++i) {
    int arg = 0;
    fit.posteriors.row(i).maxCoeff(&arg);
    labels[static_cast<std::size_t>(i)] = arg;
  }
  j["labels"] = std::move(labels);
  return j;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw otrimle::Error("cannot write file: " + path);
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Gaussian mixture clustering with improper noise and "
               "bootstrap-adequacy selection of the number of clusters"};
  app.require_subcommand(1);

  CommonIo io;
  std::string output;
  std::string calibrationFile;
  std::string deltaGridSpec;
  std::uint64_t seed = 0;
  int threads = 0;
  otrimle::FitControl ctrl;
  otrimle::SelectSettings sel;
  sel.B = 100;

  auto addIo = [&](CLI::App* cmd) {
    cmd->add_option("-i,--input", io.input, "input CSV file")->required();
    cmd->add_option("--delimiter", io.delimiter, "CSV delimiter (default ',')");
    cmd->add_flag("--header", io.header, "skip the first CSV line");
    cmd->add_flag("--standardize,!--no-standardize", io.standardize,
                  "rescale columns to mean 0, sample variance 1");
  };
  auto addFitOpts = [&](CLI::App* cmd) {
    cmd->add_option("--gamma", ctrl.gamma, "eigenvalue-ratio bound (default 20)");
    cmd->add_option("--beta", ctrl.beta,
                    "noise-proportion weight in the delta objective (default 0)");
    cmd->add_option("--restarts", ctrl.nRestarts, "EM restarts (default 10)");
    cmd->add_option("--max-iter", ctrl.maxIter, "EM iteration cap");
    cmd->add_option("--tol", ctrl.tol, "relative log-likelihood tolerance");
    cmd->add_option("--delta-grid", deltaGridSpec,
                    "comma-separated noise density candidates (must include 0)");
    cmd->add_option("--noise-cap", ctrl.noiseCap, "maximum mean noise posterior");
  };

  // fit
  auto* cmdFit =
      app.add_subcommand("fit", "fit the mixture at a fixed number of clusters");
  int fitG = 1;
  double fitDelta = -1.0;
  addIo(cmdFit);
  addFitOpts(cmdFit);
  cmdFit->add_option("-g,--g", fitG, "number of clusters")->required();
  cmdFit->add_option("--delta", fitDelta,
                     "fixed improper noise density (default: tuned)");
  cmdFit->add_option("-o,--output", output, "output JSON path")->required();
  cmdFit->add_option("--seed", seed, "RNG seed")->required();

  // select
  auto* cmdSelect = app.add_subcommand(
      "select", "choose the number of clusters by bootstrap adequacy");
  addIo(cmdSelect);
  addFitOpts(cmdSelect);
  cmdSelect->add_option("--gmax", sel.Gmax, "largest candidate G (default 10)");
  cmdSelect->add_option("-B,--B", sel.B, "bootstrap replicates (default 100)");
  cmdSelect->add_option("-c,--c", sel.c, "adequacy cutoff (default 2)");
  cmdSelect->add_option("--p0", sel.p0,
                        "noise cost in the simplicity score (default 0.05)");
  cmdSelect->add_flag("--early-stop", sel.earlyStop,
                      "stop once no later G can improve the simplicity score");
  cmdSelect->add_option("-o,--output", output, "report JSON path")->required();
  cmdSelect->add_option("--seed", seed, "RNG seed")->required();
  cmdSelect->add_option("--threads", threads, "worker threads (0 = all cores)");
  cmdSelect->add_option("--calibration-file", calibrationFile,
                        "reference moment table (JSON)");

  // calibrate
  auto* cmdCalibrate =
      app.add_subcommand("calibrate", "regenerate the reference moment table");
  int reps = 2000;
  std::string mGridSpec;
  int gridQ = 100;
  cmdCalibrate->add_option("-o,--output", output, "table JSON path")->required();
  cmdCalibrate->add_option("--reps", reps,
                           "Monte-Carlo replicates per node (default 2000)");
  cmdCalibrate->add_option("--m-grid", mGridSpec,
                           "comma-separated effective sizes (default 5..10000)");
  cmdCalibrate->add_option("--q", gridQ, "evaluation grid size (default 100)");
  cmdCalibrate->add_option("--seed", seed, "RNG seed")->required();
  cmdCalibrate->add_option("--threads", threads, "worker threads (0 = all cores)");

  // simulate
  auto* cmdSimulate =
      app.add_subcommand("simulate", "generate a benchmark dataset");
  int dgpId = 1;
  std::string specFile;
  std::string labelsOutput;
  cmdSimulate->add_option("--dgp", dgpId, "built-in process id (1-4)");
  cmdSimulate->add_option("--spec-file", specFile,
                          "custom JSON process description");
  cmdSimulate->add_option("-o,--output", output, "data CSV path")->required();
  cmdSimulate->add_option("--labels-output", labelsOutput, "labels CSV path");
  cmdSimulate->add_option("--seed", seed, "RNG seed")->required();
  cmdSimulate->add_option("--delimiter", io.delimiter, "CSV delimiter");

  // bench
  auto* cmdBench = app.add_subcommand("bench", "run the simulation benchmark");
  std::string dgpSpecList = "1,2";
  std::string methodSpec = "AOTRI,AOTRIB,GBIC,GICL";
  int nRuns = 20;
  otrimle::BenchmarkSettings bench;
  cmdBench->add_option("--dgps", dgpSpecList, "comma-separated DGP ids");
  cmdBench->add_option("--methods", methodSpec, "subset of AOTRI,AOTRIB,GBIC,GICL");
  cmdBench->add_option("--runs", nRuns, "datasets per DGP (default 20)");
  cmdBench->add_option("--gmax", bench.Gmax, "largest candidate G (default 6)");
  cmdBench->add_option("-B,--B", bench.B, "bootstrap replicates (default 20)");
  cmdBench->add_option("-c,--c", bench.c, "adequacy cutoff (default 2)");
  cmdBench->add_option("--p0", bench.p0, "noise cost in the simplicity score");
  cmdBench->add_option("--gamma", bench.base.gamma, "eigenvalue-ratio bound");
  cmdBench->add_option("--restarts", bench.base.nRestarts, "EM restarts per fit");
  cmdBench->add_option("--tol", bench.base.tol, "EM tolerance");
  cmdBench->add_option("-o,--output", output, "output base path")->required();
  cmdBench->add_option("--seed", seed, "RNG seed")->required();
  cmdBench->add_option("--threads", threads, "worker threads (0 = all cores)");
  cmdBench->add_option("--calibration-file", calibrationFile,
                       "reference moment table (JSON)");

  CLI11_PARSE(app, argc, argv);
  const int resolvedThreads = otrimle::resolve_threads(threads);

  try {
    if (cmdFit->parsed()) {
      const otrimle::DataMatrix data = load_input(io);
      if (!deltaGridSpec.empty()) ctrl.deltaGrid = parse_double_list(deltaGridSpec);
      otrimle::RimleFit fit;
      if (fitDelta >= 0.0)
        fit = otrimle::rimle_em(data, fitG, fitDelta, ctrl, seed);
      else
        fit = otrimle::otrimle_fit(data, fitG, ctrl, seed);
      nlohmann::json j = fit_to_json(fit);
      j["seed"] = seed;
      write_text(output, j.dump(2) + "\n");
      std::cout << "fit: G=" << fitG << " delta=" << fit.params.delta
                << " noise=" << fit.params.pi[0]
                << " loglik=" << fit.pseudoLoglik << "\n";
      return 0;
    }

    if (cmdSelect->parsed()) {
      const otrimle::DataMatrix data = load_input(io);
      if (!deltaGridSpec.empty()) ctrl.deltaGrid = parse_double_list(deltaGridSpec);
      const otrimle::CalibrationTable table =
          resolve_table(calibrationFile, resolvedThreads);
      sel.threads = resolvedThreads;
      if (data.rows() < 5 * sel.Gmax)
        std::cerr << "warning: clusters with effective size below 5 are "
                     "standardized at the smallest calibration node\n";
      const otrimle::SelectionReport report =
          otrimle::select_clusters(data, sel, ctrl, table, seed);
      const otrimle::ReportPaths paths = otrimle::emit_report(report, output);
      if (report.anyAdequate) {
        std::cout << "selected G=" << report.chosenG << " (report: " << paths.json
                  << ")\n";
        return 0;
      }
      std::cout << "no adequate clustering up to Gmax=" << sel.Gmax
                << "; best standardized score at G=" << report.fallbackG
                << " (report: " << paths.json << ")\n";
      return kExitNoAdequate;
    }

    if (cmdCalibrate->parsed()) {
      std::vector<double> mGrid = otrimle::default_calibration_m_grid();
      if (!mGridSpec.empty()) mGrid = parse_double_list(mGridSpec);
      const otrimle::CalibrationTable table = otrimle::calibrate(
          mGrid, reps, otrimle::EvalGrid::standard(gridQ), seed, resolvedThreads);
      otrimle::save_table(table, output);
      std::cout << "calibration table with " << mGrid.size()
                << " nodes written to " << output << "\n";
      return 0;
    }

    if (cmdSimulate->parsed()) {
      otrimle::LabeledDataset dataset;
      if (!specFile.empty()) {
        std::ifstream in(specFile);
        if (!in) throw otrimle::ParseError("cannot open spec file: " + specFile);
        nlohmann::json j;
        in >> j;
        dataset = otrimle::generate(otrimle::dgp_spec_from_json(j), seed);
      } else {
        dataset = otrimle::generate_dgp(dgpId, seed);
      }
      otrimle::save_csv(dataset.data, output, {}, io.delimiter);
      if (!labelsOutput.empty()) {
        std::ofstream out(labelsOutput);
        if (!out) throw otrimle::Error("cannot write file: " + labelsOutput);
        for (int v : dataset.labels) out << v << "\n";
      }
      std::cout << dataset.dgpId << ": n=" << dataset.data.rows()
                << " p=" << dataset.data.cols() << " trueG=" << dataset.trueG
                << " written to " << output << "\n";
      return 0;
    }

    if (cmdBench->parsed()) {
      std::vector<int> dgps;
      {
        std::stringstream ss(dgpSpecList);
        std::string cell;
        while (std::getline(ss, cell, ',')) dgps.push_back(std::stoi(cell));
      }
      std::vector<otrimle::Method> methods;
      {
        std::stringstream ss(methodSpec);
        std::string cell;
        while (std::getline(ss, cell, ','))
          methods.push_back(otrimle::method_from_name(cell));
      }
      const otrimle::CalibrationTable table =
          resolve_table(calibrationFile, resolvedThreads);
      bench.threads = resolvedThreads;
      const auto rows = otrimle::run_benchmark(dgps, methods, nRuns, bench, table, seed);
      otrimle::write_benchmark_csv(rows, output + "_rows.csv");
      write_text(output + "_summary.json",
                 otrimle::summarize_benchmark(rows).dump(2) + "\n");
      std::cout << rows.size() << " benchmark rows written to " << output
                << "_rows.csv\n";
      return 0;
    }
  } catch (const otrimle::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const otrimle::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const otrimle::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
