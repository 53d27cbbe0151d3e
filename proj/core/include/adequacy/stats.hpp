#pragma once

#include <span>
#include <vector>

namespace adequacy {

/// Linear-interpolation ("type 7") quantile of an ascending sample.
/// Plotting positions are (k-1)/(n-1). `p` is clamped to [0, 1].
/// Throws DataError on an empty sample.
[[nodiscard]] double quantile_type7_sorted(std::span<const double> sorted, double p);

/// As above on an unsorted sample (sorts a copy).
[[nodiscard]] double quantile_type7(std::span<const double> sample, double p);

[[nodiscard]] double mean(std::span<const double> values);

/// Unbiased sample variance; zero for fewer than two values.
[[nodiscard]] double variance(std::span<const double> values);

[[nodiscard]] std::vector<double> sorted_copy(std::span<const double> values);

}  // namespace adequacy
