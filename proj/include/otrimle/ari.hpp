// Adjusted Rand index from the contingency table of two partitions.
#pragma once

#include <map>
#include <vector>

#include "otrimle/errors.hpp"

namespace otrimle {

inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ConfigError("partitions must have equal length");
  const std::size_t n = a.size();
  if (n < 2) throw ConfigError("adjusted Rand index needs at least two items");

  std::map<int, int> ia;
  std::map<int, int> ib;
  for (int v : a) ia.emplace(v, static_cast<int>(ia.size()));
  for (int v : b) ib.emplace(v, static_cast<int>(ib.size()));
  std::vector<std::vector<double>> table(ia.size(), std::vector<double>(ib.size(), 0.0));
  std::vector<double> rows(ia.size(), 0.0);
  std::vector<double> cols(ib.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int r = ia[a[i]];
    const int c = ib[b[i]];
    table[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] += 1.0;
    rows[static_cast<std::size_t>(r)] += 1.0;
    cols[static_cast<std::size_t>(c)] += 1.0;
  }

  auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& row : table)
    for (double cell : row) index += choose2(cell);
  double sumRows = 0.0;
  for (double r : rows) sumRows += choose2(r);
  double sumCols = 0.0;
  for (double c : cols) sumCols += choose2(c);
  const double expected = sumRows * sumCols / choose2(static_cast<double>(n));
  const double maximum = 0.5 * (sumRows + sumCols);
  if (maximum == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (maximum - expected);
}

}  // namespace otrimle
