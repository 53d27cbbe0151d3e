#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace adequacy::uncertainty {

struct BootstrapConfig {
    std::size_t replications = 10000;
    std::uint64_t seed = 0;
    double ci_level = 0.95;

    /// replications >= 100 and 0 < ci_level < 1, else ConfigError.
    void validate() const;
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
};

/// Row-major replications x n matrix of indices in [0, n).
struct IndexMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint32_t> data;

    [[nodiscard]] std::span<const std::uint32_t> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }
};

/// Row r is drawn from stream r of Xoshiro256StarStar(seed), so any subset of
/// rows can be regenerated independently. Throws ConfigError when n is zero.
[[nodiscard]] IndexMatrix resample_indices(std::size_t n, std::size_t replications, std::uint64_t seed);

/// Type-7 quantiles at (1 - level)/2 and (1 + level)/2. Throws DataError when empty.
[[nodiscard]] ConfidenceInterval percentile_interval(std::span<const double> replicates, double level);

/// Mean of each resample, in replication order.
[[nodiscard]] std::vector<double> bootstrap_means(std::span<const double> values, const BootstrapConfig& config);

/// Percentile interval of the mean of `values`. Throws DataError for fewer than two values.
[[nodiscard]] ConfidenceInterval season_bootstrap(std::span<const double> values, const BootstrapConfig& config);

/// Receives the drawn block indices in ascending order, returns one value per metric.
using BlockPipeline = std::function<std::vector<double>(std::span<const std::size_t> blocks)>;

struct BlockBootstrapResult {
    std::vector<ConfidenceInterval> intervals;      ///< one per metric
    std::vector<std::vector<double>> replicates;    ///< [metric][kept replication]
    std::size_t used = 0;
    std::size_t dropped = 0;
    std::size_t distinct_evaluations = 0;
};

/// Draws n_blocks blocks with replacement per replication (the same index
/// stream as season_bootstrap) and evaluates `pipeline` on each draw. The
/// pipeline sees sorted indices, so draws with the same multiset share one
/// evaluation when `memoize` is set. Replications whose pipeline throws
/// adequacy::Error are dropped; more than 1% dropped is a NumericalError.
[[nodiscard]] BlockBootstrapResult block_bootstrap(std::size_t n_blocks, const BlockPipeline& pipeline,
                                                   const BootstrapConfig& config, bool memoize = true);

}  // namespace adequacy::uncertainty
