#include "adequacy/uncertainty.hpp"

#include "adequacy/error.hpp"
#include "adequacy/parallel.hpp"
#include "adequacy/rng.hpp"
#include "adequacy/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include <fmt/format.h>

namespace adequacy::uncertainty {

void BootstrapConfig::validate() const {
    if (replications < 100) throw ConfigError(fmt::format("bootstrap replications must be at least 100, got {}", replications));
    if (!(ci_level > 0.0 && ci_level < 1.0)) throw ConfigError(fmt::format("confidence level must lie in (0, 1), got {}", ci_level));
}

IndexMatrix resample_indices(std::size_t n, std::size_t replications, std::uint64_t seed) {
    if (n == 0) throw ConfigError("cannot resample from an empty set");
    if (n > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("resample size too large");
    IndexMatrix m;
    m.rows = replications;
    m.cols = n;
    m.data.resize(replications * n);
    parallel_for(replications, [&](std::size_t r) {
        Xoshiro256StarStar rng(seed, r);
        auto* out = m.data.data() + r * n;
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint32_t>(rng.below(n));
    });
    return m;
}

ConfidenceInterval percentile_interval(std::span<const double> replicates, double level) {
    if (replicates.empty()) throw DataError("percentile interval of an empty replicate set");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError(fmt::format("confidence level must lie in (0, 1), got {}", level));
    const auto sorted = sorted_copy(replicates);
    const double alpha = (1.0 - level) / 2.0;
    return {quantile_type7_sorted(sorted, alpha), quantile_type7_sorted(sorted, 1.0 - alpha), level};
}

std::vector<double> bootstrap_means(std::span<const double> values, const BootstrapConfig& config) {
    config.validate();
    if (values.size() < 2) throw DataError("season bootstrap needs at least two values");
    const std::size_t n = values.size();
    std::vector<double> means(config.replications);
    parallel_for(config.replications, [&](std::size_t r) {
        Xoshiro256StarStar rng(config.seed, r);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += values[rng.below(n)];
        means[r] = s / static_cast<double>(n);
    });
    return means;
}

ConfidenceInterval season_bootstrap(std::span<const double> values, const BootstrapConfig& config) {
    const auto means = bootstrap_means(values, config);
    return percentile_interval(means, config.ci_level);
}

BlockBootstrapResult block_bootstrap(std::size_t n_blocks, const BlockPipeline& pipeline,
                                     const BootstrapConfig& config, bool memoize) {
    config.validate();
    if (n_blocks < 2) throw DataError("block bootstrap needs at least two blocks");

    const auto draws = resample_indices(n_blocks, config.replications, config.seed);

    // Map every replication to an evaluation slot.
    std::vector<std::vector<std::size_t>> keys;
    std::vector<std::size_t> slot(config.replications);
    std::map<std::vector<std::size_t>, std::size_t> seen;
    for (std::size_t r = 0; r < config.replications; ++r) {
        const auto row = draws.row(r);
        std::vector<std::size_t> key(row.begin(), row.end());
        std::sort(key.begin(), key.end());
        if (memoize) {
            const auto [it, inserted] = seen.emplace(key, keys.size());
            if (inserted) keys.push_back(std::move(key));
            slot[r] = it->second;
        } else {
            slot[r] = keys.size();
            keys.push_back(std::move(key));
        }
    }

    std::vector<std::optional<std::vector<double>>> results(keys.size());
    parallel_for(keys.size(), [&](std::size_t k) {
        try {
            results[k] = pipeline(keys[k]);
        } catch (const Error&) {
            results[k].reset();
        }
    });

    BlockBootstrapResult out;
    out.distinct_evaluations = keys.size();
    std::size_t n_metrics = 0;
    bool have_width = false;
    for (std::size_t r = 0; r < config.replications; ++r) {
        const auto& res = results[slot[r]];
        if (!res) {
            ++out.dropped;
            continue;
        }
        if (!have_width) {
            n_metrics = res->size();
            out.replicates.assign(n_metrics, {});
            have_width = true;
        } else if (res->size() != n_metrics) {
            throw NumericalError("block bootstrap pipeline returned a varying number of metrics");
        }
        for (std::size_t m = 0; m < n_metrics; ++m) out.replicates[m].push_back((*res)[m]);
        ++out.used;
    }
    if (static_cast<double>(out.dropped) > 0.01 * static_cast<double>(config.replications)) {
        throw NumericalError(fmt::format("block bootstrap dropped {} of {} replications", out.dropped,
                                         config.replications));
    }
    for (const auto& values : out.replicates) out.intervals.push_back(percentile_interval(values, config.ci_level));
    return out;
}

}  // namespace adequacy::uncertainty
