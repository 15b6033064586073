// Selection report emission: the JSON document plus two plot-data CSVs, one
// with observed/bootstrap quality values and the adequacy cutoff per G, one
// with noise proportions and simplicity scores.
#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include "otrimle/selection.hpp"

namespace otrimle {

namespace detail {

inline std::string strip_json_ext(const std::string& path) {
  const std::string ext = ".json";
  if (path.size() > ext.size() &&
      path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
    return path.substr(0, path.size() - ext.size());
  return path;
}

}  // namespace detail

struct ReportPaths {
  std::string json;
  std::string qualityCsv;
  std::string simplicityCsv;
};

inline ReportPaths report_paths(const std::string& jsonPath) {
  const std::string base = detail::strip_json_ext(jsonPath);
  return {jsonPath, base + "_quality.csv", base + "_simplicity.csv"};
}

inline ReportPaths emit_report(const SelectionReport& report, const std::string& jsonPath) {
  const ReportPaths paths = report_paths(jsonPath);

  {
    std::ofstream out(paths.json, std::ios::binary);
    if (!out) throw Error("cannot write report: " + paths.json);
    out << report_to_json(report).dump(2) << "\n";
  }

  {
    std::ofstream out(paths.qualityCsv, std::ios::binary);
    if (!out) throw Error("cannot write plot data: " + paths.qualityCsv);
    out.precision(17);
    out << "G,source,Q,cutoff\n";
    for (const auto& rec : report.records) {
      const bool haveCutoff =
          std::isfinite(rec.tauLocation) && std::isfinite(rec.tauScale);
      const double cutoff = rec.tauLocation + report.settings.c * rec.tauScale;
      out << rec.G << ",observed,";
      if (std::isfinite(rec.qObserved)) out << rec.qObserved;
      out << ',';
      if (haveCutoff) out << cutoff;
      out << "\n";
      for (double q : rec.qBootstrap) {
        out << rec.G << ",bootstrap," << q << ',';
        if (haveCutoff) out << cutoff;
        out << "\n";
      }
    }
  }

  {
    std::ofstream out(paths.simplicityCsv, std::ios::binary);
    if (!out) throw Error("cannot write plot data: " + paths.simplicityCsv);
    out.precision(17);
    out << "G,noiseProp,S,adequate\n";
    for (const auto& rec : report.records) {
      out << rec.G << ',';
      if (std::isfinite(rec.noiseProp)) out << rec.noiseProp;
      out << ',';
      if (std::isfinite(rec.simplicity)) out << rec.simplicity;
      out << ',' << (rec.adequate ? 1 : 0) << "\n";
    }
  }
  return paths;
}

}  // namespace otrimle
