#pragma once

#include <cstddef>
#include <vector>

namespace condex {

/// Paired observations of the conditioning variable x1 and the concomitant x2.
struct PairData {
  std::vector<double> x1;
  std::vector<double> x2;

  [[nodiscard]] std::size_t size() const noexcept { return x1.size(); }
};

/// Conditional quantiles on a grid: rows are x1 values, columns are taus.
struct ConditionalQuantileCurve {
  std::vector<double> x1;
  std::vector<double> taus;
  std::vector<double> values;  // row-major, x1.size() * taus.size()

  [[nodiscard]] double at(std::size_t row, std::size_t col) const { return values[row * taus.size() + col]; }
};

}  // namespace condex
