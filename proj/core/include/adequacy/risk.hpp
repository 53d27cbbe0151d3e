#pragma once

#include "adequacy/dnw.hpp"
#include "adequacy/evt.hpp"
#include "adequacy/pmf.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace adequacy::ingest {
struct SeasonTrace;
}

namespace adequacy::risk {

/// Expected-value adequacy metrics for one season.
struct RiskMetrics {
    double lole_hours = 0.0;   ///< n * P(Z < 0)
    double eeu_mwh = 0.0;      ///< n * E[max(-Z, 0)]
    double n_hours = 0.0;      ///< season length
    double p_shortfall = 0.0;  ///< P(Z < 0)

    [[nodiscard]] double eeu_gwh() const noexcept { return eeu_mwh / 1000.0; }
};

/// Distribution of Z = X - (D - W): the fleet pmf convolved with the reflected
/// demand-net-of-wind pmf.
[[nodiscard]] DiscretePmf balance_distribution(const DiscretePmf& fleet, const DiscretePmf& dnw);

/// Shortfall is Z < 0 strictly; EEU is the discrete sum over negative bins.
/// Throws ConfigError when n_hours is zero.
[[nodiscard]] RiskMetrics compute_metrics(const DiscretePmf& z, double n_hours);

/// Cumulative views of the fleet distribution X that turn the Z convolution
/// into a single pass over a demand-net-of-wind pmf:
///   P(Z < 0)        = sum_v p(v) P(X < v)
///   E[max(-Z, 0)]   = sum_v p(v) E[max(v - X, 0)]
class ShortfallKernel {
public:
    explicit ShortfallKernel(const DiscretePmf& fleet);

    /// P(X < v).
    [[nodiscard]] double prob_below(std::int64_t v) const noexcept;
    /// E[max(v - X, 0)] in MW.
    [[nodiscard]] double expected_deficit(std::int64_t v) const noexcept;
    /// Smallest capacity with positive probability; v at or below it never short.
    [[nodiscard]] std::int64_t min_capacity() const noexcept { return origin_; }
    [[nodiscard]] double mean_capacity() const noexcept { return mean_; }

private:
    std::int64_t origin_ = 0;
    double mean_ = 0.0;
    std::vector<double> below_;   // below_[k] = P(X < origin + k), k in [0, size]
    std::vector<double> deficit_; // deficit_[k] = E[max(origin + k - X, 0)]
};

/// Metrics from a demand-net-of-wind pmf; equal to compute_metrics(balance_distribution(...)).
[[nodiscard]] RiskMetrics shortfall_metrics(const ShortfallKernel& kernel, const DiscretePmf& dnw, double n_hours);

/// Metrics for independent demand and wind marginals without materializing their
/// difference; only (d, w) pairs with d - w above the fleet minimum are visited.
[[nodiscard]] RiskMetrics independence_metrics(const ShortfallKernel& kernel, const DiscretePmf& demand,
                                               const DiscretePmf& wind, double n_hours);

/// Metrics for a built tail model (independence uses its marginals directly).
[[nodiscard]] RiskMetrics model_risk(const dnw::TailModel& model, const ShortfallKernel& kernel, double n_hours);

struct SeasonRiskOptions {
    dnw::ModelKind kind = dnw::ModelKind::evt;
    double threshold_quantile = 0.95;  ///< evt only
    evt::FitOptions fit;
};

/// Builds the model for the trace, discretizes it and evaluates the metrics with
/// n_hours equal to the trace length.
[[nodiscard]] RiskMetrics season_risk(const ingest::SeasonTrace& trace, const ShortfallKernel& kernel,
                                      const SeasonRiskOptions& options);

/// Pipeline on raw samples: `demand` and `wind` paired hour by hour.
[[nodiscard]] RiskMetrics sample_risk(std::span<const double> demand, std::span<const double> wind,
                                      const ShortfallKernel& kernel, const SeasonRiskOptions& options, double n_hours);

[[nodiscard]] dnw::TailModel build_model(std::span<const double> demand, std::span<const double> wind,
                                         const SeasonRiskOptions& options);

/// Arithmetic mean of every field. Throws DataError on an empty list.
[[nodiscard]] RiskMetrics long_run_mean(std::span<const RiskMetrics> per_season);

}  // namespace adequacy::risk
