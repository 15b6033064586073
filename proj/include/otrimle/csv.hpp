// Delimiter-separated numeric table input/output and column standardization.
#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "otrimle/types.hpp"

namespace otrimle {

struct CsvOptions {
  char delimiter = ',';
  bool header = false;
};

inline DataMatrix load_csv(const std::string& path, const CsvOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineNo = 0;
  bool skippedHeader = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (opt.header && !skippedHeader) {
      skippedHeader = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, opt.delimiter)) {
      ++col;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
      while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
      double value;
      const auto res = std::from_chars(begin, end, value);
      if (res.ec != std::errc{} || res.ptr != end)
        throw ParseError("non-numeric cell at row " +
                         std::to_string(rows.size() + 1) + " col " +
                         std::to_string(col) + " of " + path);
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged row " + std::to_string(rows.size() + 1) + " in " + path +
                       ": expected " + std::to_string(rows.front().size()) +
                       " cells, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty())
    throw ParseError("no numeric data in " + path);
  DataMatrix data(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      data(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  (void)lineNo;
  return data;
}

inline void save_csv(const DataMatrix& data, const std::string& path,
                     const std::vector<std::string>& header = {},
                     char delimiter = ',') {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out.precision(17);
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j) out << delimiter;
      out << header[j];
    }
    out << "\n";
  }
  for (int i = 0; i < data.rows(); ++i) {
    for (int j = 0; j < data.cols(); ++j) {
      if (j) out << delimiter;
      out << data(i, j);
    }
    out << "\n";
  }
}

// Rescale every column to mean zero and sample variance one (divisor n-1).
inline DataMatrix standardize_columns(const DataMatrix& data) {
  check_data(data);
  if (data.rows() < 2) throw ConfigError("standardization needs at least two rows");
  DataMatrix out = data;
  for (int j = 0; j < data.cols(); ++j) {
    const double mean = data.col(j).mean();
    const double var =
        (data.col(j).array() - mean).square().sum() / (data.rows() - 1);
    if (!(var > 0.0))
      throw ConfigError("column " + std::to_string(j + 1) + " has zero variance");
    out.col(j) = (data.col(j).array() - mean) / std::sqrt(var);
  }
  return out;
}

}  // namespace otrimle
