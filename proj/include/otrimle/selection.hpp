// Choice of the number of clusters by parametric-bootstrap adequacy testing.
// For each candidate G the data are fitted, B bootstrap datasets are drawn
// from the fitted model and re-clustered through the full pipeline, and the
// observed quality statistic is standardized against the robust location and
// scale of its bootstrap distribution. The chosen G is the adequate one with
// the smallest simplicity S(G) = G + noise/p0.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "otrimle/bootstrap.hpp"
#include "otrimle/fit.hpp"
#include "otrimle/parallel.hpp"
#include "otrimle/quality.hpp"
#include "otrimle/tau.hpp"

namespace otrimle {

struct SelectSettings {
  int Gmax = 10;
  int B = 100;
  double c = 2.0;
  double p0 = 0.05;
  int threads = 1;
  bool earlyStop = false;
};

struct AdequacyRecord {
  int G = 0;
  double qObserved = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> qBootstrap;
  double tauLocation = std::numeric_limits<double>::quiet_NaN();
  double tauScale = std::numeric_limits<double>::quiet_NaN();
  double standardized = std::numeric_limits<double>::quiet_NaN();
  bool adequate = false;
  double noiseProp = std::numeric_limits<double>::quiet_NaN();
  double simplicity = std::numeric_limits<double>::quiet_NaN();
  std::string failureReason;  // empty when the fit and test succeeded

  bool failed() const { return !failureReason.empty(); }
};

struct SelectionReport {
  std::vector<AdequacyRecord> records;
  int chosenG = 0;  // 0 when no clustering is adequate
  bool anyAdequate = false;
  int fallbackG = 0;  // best standardized score; 0 when nothing fitted
  SelectSettings settings;
  double beta = 0.0;
  double gamma = 20.0;
  std::uint64_t seed = 0;
};

inline double simplicity(int G, double noiseProp, double p0) {
  if (!(p0 > 0.0)) throw ConfigError("p0 must be positive");
  if (noiseProp < 0.0 || noiseProp > 1.0)
    throw ConfigError("noise proportion must lie in [0,1]");
  return static_cast<double>(G) + noiseProp / p0;
}

// Standardized score and adequacy flag. With zero bootstrap scale, the fit
// counts as adequate only when the observed value does not exceed the
// bootstrap location.
inline std::pair<double, bool> adequacy_test(double qObserved,
                                             const std::vector<double>& qBootstrap,
                                             double c) {
  const auto [m, s] = tau_location_scale(qBootstrap);
  if (s > 0.0) {
    const double standardized = (qObserved - m) / s;
    return {standardized, standardized <= c};
  }
  if (qObserved <= m) return {0.0, true};
  return {std::numeric_limits<double>::infinity(), false};
}

// argmin of S(G) over adequate records, ties to the smaller G; 0 if none.
inline int choose_from_records(const std::vector<AdequacyRecord>& records) {
  int chosen = 0;
  double bestS = std::numeric_limits<double>::infinity();
  for (const auto& rec : records) {
    if (rec.failed() || !rec.adequate) continue;
    if (rec.simplicity < bestS) {
      bestS = rec.simplicity;
      chosen = rec.G;
    }
  }
  return chosen;
}

inline int fallback_from_records(const std::vector<AdequacyRecord>& records) {
  int fallback = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rec : records) {
    if (rec.failed() || !std::isfinite(rec.standardized)) continue;
    if (rec.standardized < best) {
      best = rec.standardized;
      fallback = rec.G;
    }
  }
  return fallback;
}

namespace detail {

// Minimum number of surviving bootstrap replicates for a usable empirical
// distribution.
inline int required_bootstrap(int B) {
  return std::min(B, std::max(10, (B + 1) / 2));
}

struct BootResult {
  double q = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
};

inline BootResult bootstrap_replicate(const DataMatrix& X, const RimleFit& fit, int G,
                                      const FitControl& ctrl, const CalibrationTable& table,
                                      std::uint64_t seed, int b) {
  BootResult res;
  try {
    Rng rng(derive_seed(seed, 0xb007u, static_cast<std::uint64_t>(G),
                        static_cast<std::uint64_t>(b)));
    const DataMatrix D = bootstrap_sample(fit, X, static_cast<int>(X.rows()), rng);
    const RimleFit refit = otrimle_fit(
        D, G, ctrl,
        derive_seed(seed, 0x2ef1u, static_cast<std::uint64_t>(G),
                    static_cast<std::uint64_t>(b)));
    res.q = quality_Q(refit, D, table, table.grid).total;
    res.ok = std::isfinite(res.q);
  } catch (const Error&) {
    res.ok = false;
  }
  return res;
}

// Fit one candidate G and score the observed data; the bootstrap replicates
// are scheduled separately so they can share the thread pool across G.
inline AdequacyRecord observed_candidate(const DataMatrix& X, int G,
                                         const SelectSettings& sel, const FitControl& ctrl,
                                         const CalibrationTable& table, std::uint64_t seed,
                                         RimleFit* keep) {
  AdequacyRecord rec;
  rec.G = G;
  try {
    RimleFit fit =
        otrimle_fit(X, G, ctrl, derive_seed(seed, 0x0b5u, static_cast<std::uint64_t>(G)));
    rec.qObserved = quality_Q(fit, X, table, table.grid).total;
    rec.noiseProp = fit.params.pi[0];
    rec.simplicity = simplicity(G, rec.noiseProp, sel.p0);
    if (keep) *keep = std::move(fit);
  } catch (const Error& e) {
    rec.failureReason = std::string("fit failed: ") + e.what();
  }
  return rec;
}

inline void finish_record(AdequacyRecord& rec, const std::vector<BootResult>& results,
                          const SelectSettings& sel) {
  for (const auto& r : results)
    if (r.ok) rec.qBootstrap.push_back(r.q);
  if (static_cast<int>(rec.qBootstrap.size()) < required_bootstrap(sel.B)) {
    rec.failureReason = "insufficient bootstrap sample";
    if (rec.qBootstrap.size() >= 2) {
      const auto [m, s] = tau_location_scale(rec.qBootstrap);
      rec.tauLocation = m;
      rec.tauScale = s;
    }
    return;
  }
  const auto [m, s] = tau_location_scale(rec.qBootstrap);
  rec.tauLocation = m;
  rec.tauScale = s;
  const auto [standardized, adequate] = adequacy_test(rec.qObserved, rec.qBootstrap, sel.c);
  rec.standardized = standardized;
  rec.adequate = adequate;
}

inline void run_bootstrap_phase(const DataMatrix& X, std::vector<AdequacyRecord>& records,
                                const std::vector<RimleFit>& fits,
                                const std::vector<int>& candidates,
                                const SelectSettings& sel, const FitControl& ctrl,
                                const CalibrationTable& table, std::uint64_t seed) {
  struct Task {
    int gIndex;
    int b;
  };
  std::vector<Task> tasks;
  tasks.reserve(candidates.size() * static_cast<std::size_t>(sel.B));
  for (int gi : candidates)
    for (int b = 0; b < sel.B; ++b) tasks.push_back({gi, b});
  std::vector<std::vector<BootResult>> results(records.size());
  for (int gi : candidates)
    results[static_cast<std::size_t>(gi)].resize(static_cast<std::size_t>(sel.B));
  parallel_for(static_cast<int>(tasks.size()), sel.threads, [&](int t) {
    const Task& task = tasks[static_cast<std::size_t>(t)];
    results[static_cast<std::size_t>(task.gIndex)][static_cast<std::size_t>(task.b)] =
        bootstrap_replicate(X, fits[static_cast<std::size_t>(task.gIndex)],
                            task.gIndex + 1, ctrl, table, seed, task.b);
  });
  for (int gi : candidates)
    finish_record(records[static_cast<std::size_t>(gi)],
                  results[static_cast<std::size_t>(gi)], sel);
}

}  // namespace detail

inline SelectionReport select_clusters(const DataMatrix& X, const SelectSettings& sel,
                                       const FitControl& ctrl, const CalibrationTable& table,
                                       std::uint64_t seed,
                                       std::vector<RimleFit>* keepFits = nullptr) {
  check_data(X);
  check_control(ctrl);
  check_table(table);
  if (sel.Gmax < 1) throw ConfigError("Gmax must be >= 1");
  if (sel.B < 2) throw ConfigError("B must be >= 2");
  if (!(sel.p0 > 0.0)) throw ConfigError("p0 must be positive");

  SelectionReport report;
  report.settings = sel;
  report.beta = ctrl.beta;
  report.gamma = ctrl.gamma;
  report.seed = seed;
  if (keepFits) keepFits->clear();

  if (sel.earlyStop) {
    double bestAdequateS = std::numeric_limits<double>::infinity();
    for (int G = 1; G <= sel.Gmax; ++G) {
      AdequacyRecord rec;
      std::vector<RimleFit> fit(1);
      rec = detail::observed_candidate(X, G, sel, ctrl, table, seed, &fit[0]);
      if (!rec.failed()) {
        std::vector<AdequacyRecord> one{std::move(rec)};
        detail::run_bootstrap_phase(X, one, fit, {0}, sel, ctrl, table, seed);
        rec = std::move(one[0]);
      }
      report.records.push_back(std::move(rec));
      if (keepFits) keepFits->push_back(std::move(fit[0]));
      const auto& done = report.records.back();
      if (!done.failed() && done.adequate)
        bestAdequateS = std::min(bestAdequateS, done.simplicity);
      // every later candidate satisfies S(G') >= G' >= G+1
      if (bestAdequateS < static_cast<double>(G) + 1.0) break;
    }
  } else {
    report.records.resize(static_cast<std::size_t>(sel.Gmax));
    std::vector<RimleFit> fits(static_cast<std::size_t>(sel.Gmax));
    parallel_for(sel.Gmax, sel.threads, [&](int i) {
      report.records[static_cast<std::size_t>(i)] = detail::observed_candidate(
          X, i + 1, sel, ctrl, table, seed, &fits[static_cast<std::size_t>(i)]);
    });
    std::vector<int> candidates;
    for (int i = 0; i < sel.Gmax; ++i)
      if (!report.records[static_cast<std::size_t>(i)].failed()) candidates.push_back(i);
    detail::run_bootstrap_phase(X, report.records, fits, candidates, sel, ctrl, table,
                                seed);
    if (keepFits) *keepFits = std::move(fits);
  }

  report.chosenG = choose_from_records(report.records);
  report.anyAdequate = report.chosenG > 0;
  report.fallbackG = fallback_from_records(report.records);
  return report;
}

namespace detail {

inline nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline double double_or_nan(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::json report_to_json(const SelectionReport& report) {
  nlohmann::json j;
  j["schema"] = "otrimle-selection/1";
  j["settings"] = {{"Gmax", report.settings.Gmax}, {"B", report.settings.B},
                   {"c", report.settings.c},       {"p0", report.settings.p0},
                   {"beta", report.beta},          {"gamma", report.gamma}};
  j["seed"] = report.seed;
  j["anyAdequate"] = report.anyAdequate;
  j["chosenG"] = report.chosenG > 0 ? nlohmann::json(report.chosenG)
                                    : nlohmann::json(nullptr);
  j["fallbackG"] = report.fallbackG > 0 ? nlohmann::json(report.fallbackG)
                                        : nlohmann::json(nullptr);
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : report.records) {
    nlohmann::json r;
    r["G"] = rec.G;
    r["qObserved"] = detail::finite_or_null(rec.qObserved);
    r["qBootstrap"] = rec.qBootstrap;
    r["tauLocation"] = detail::finite_or_null(rec.tauLocation);
    r["tauScale"] = detail::finite_or_null(rec.tauScale);
    r["standardized"] = detail::finite_or_null(rec.standardized);
    r["adequate"] = rec.adequate;
    r["noiseProp"] = detail::finite_or_null(rec.noiseProp);
    r["simplicity"] = detail::finite_or_null(rec.simplicity);
    r["failureReason"] = rec.failureReason;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  return j;
}

inline SelectionReport report_from_json(const nlohmann::json& j) {
  if (!j.contains("schema") || j.at("schema").get<std::string>() != "otrimle-selection/1")
    throw ParseError("unrecognized selection report schema");
  SelectionReport report;
  const auto& s = j.at("settings");
  report.settings.Gmax = s.at("Gmax").get<int>();
  report.settings.B = s.at("B").get<int>();
  report.settings.c = s.at("c").get<double>();
  report.settings.p0 = s.at("p0").get<double>();
  report.beta = s.at("beta").get<double>();
  report.gamma = s.at("gamma").get<double>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.anyAdequate = j.at("anyAdequate").get<bool>();
  report.chosenG = j.at("chosenG").is_null() ? 0 : j.at("chosenG").get<int>();
  report.fallbackG = j.at("fallbackG").is_null() ? 0 : j.at("fallbackG").get<int>();
  for (const auto& r : j.at("records")) {
    AdequacyRecord rec;
    rec.G = r.at("G").get<int>();
    rec.qObserved = detail::double_or_nan(r.at("qObserved"));
    rec.qBootstrap = r.at("qBootstrap").get<std::vector<double>>();
    rec.tauLocation = detail::double_or_nan(r.at("tauLocation"));
    rec.tauScale = detail::double_or_nan(r.at("tauScale"));
    rec.standardized = detail::double_or_nan(r.at("standardized"));
    rec.adequate = r.at("adequate").get<bool>();
    rec.noiseProp = detail::double_or_nan(r.at("noiseProp"));
    rec.simplicity = detail::double_or_nan(r.at("simplicity"));
    rec.failureReason = r.at("failureReason").get<std::string>();
    report.records.push_back(std::move(rec));
  }
  return report;
}

}  // namespace otrimle
