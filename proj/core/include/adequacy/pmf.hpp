#pragma once

#include <cstdint>
#include <vector>

namespace adequacy {

/// Probability mass function on a 1 MW integer grid.
///
/// Bin k carries the mass of the interval [origin_mw + k, origin_mw + k + 1);
/// in convolutions and risk sums the bin is represented by its left edge.
struct DiscretePmf {
    std::int64_t origin_mw = 0;
    std::vector<double> probabilities;

    [[nodiscard]] bool empty() const noexcept { return probabilities.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return probabilities.size(); }
    /// Last bin's left edge. Undefined for an empty pmf.
    [[nodiscard]] std::int64_t last_mw() const noexcept {
        return origin_mw + static_cast<std::int64_t>(probabilities.size()) - 1;
    }
    /// Mass at `mw`, zero outside the stored range.
    [[nodiscard]] double at(std::int64_t mw) const noexcept;
    [[nodiscard]] double total() const noexcept;
    /// Mean with each bin represented by its left edge.
    [[nodiscard]] double mean() const noexcept;
    /// P(V > v) treating bins as point masses at their left edges.
    [[nodiscard]] double survivor(double v) const noexcept;
};

/// Drops zero-mass bins at both ends. An all-zero pmf becomes empty.
void trim_zeros(DiscretePmf& pmf);

/// Divides by the total mass. Throws NumericalError when the total is not positive.
void normalize(DiscretePmf& pmf);

/// Distribution of A - B for independent A and B.
[[nodiscard]] DiscretePmf difference(const DiscretePmf& a, const DiscretePmf& b);

/// Distribution of A + B for independent A and B.
[[nodiscard]] DiscretePmf sum(const DiscretePmf& a, const DiscretePmf& b);

}  // namespace adequacy
