#pragma once

#include <span>
#include <vector>

namespace condex {

/// Type-7 sample quantile (linear interpolation of order statistics with
/// h = (n - 1) tau + 1). The input need not be sorted.
///
/// Throws std::invalid_argument on an empty sample and std::domain_error for
/// tau outside [0, 1].
[[nodiscard]] double empirical_quantile_type7(std::span<const double> sample, double tau);

/// Same, for a sample already sorted ascending.
[[nodiscard]] double sorted_quantile_type7(std::span<const double> sorted, double tau);

[[nodiscard]] double mean(std::span<const double> x);
/// Population variance (divides by n).
[[nodiscard]] double variance_pop(std::span<const double> x);
[[nodiscard]] double median(std::span<const double> x);
/// Interquartile range from type-7 quartiles.
[[nodiscard]] double iqr(std::span<const double> x);

/// Kendall's tau-a in O(n log n) (Knight's merge-sort algorithm).
[[nodiscard]] double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Average ranks (1-based), ties sharing the mean of their positions.
[[nodiscard]] std::vector<double> average_ranks(std::span<const double> x);

}  // namespace condex
