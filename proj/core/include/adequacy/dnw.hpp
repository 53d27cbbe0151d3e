#pragma once

#include "adequacy/evt.hpp"
#include "adequacy/pmf.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace adequacy::dnw {

enum class ModelKind { evt, hindcast, independence };

/// "evt", "hindcast", "ind".
[[nodiscard]] std::string_view to_string(ModelKind kind);
/// Accepts "evt", "hindcast", "ind" and "independence". Throws ConfigError.
[[nodiscard]] ModelKind parse_model_kind(std::string_view text);

/// Each value contributes 1/n to bin floor(value). Throws DataError when empty.
[[nodiscard]] DiscretePmf empirical_pmf(std::span<const double> values);

/// Distribution of demand-net-of-wind for one season or a pooled dataset.
///
/// evt:          empirical below the threshold u, P(D-W > u) * (1 - H(v - u)) above it.
/// hindcast:     empirical everywhere.
/// independence: empirical demand and wind marginals convolved as if independent.
///
/// Immutable once built and cheap to copy; the independence convolution is
/// computed on first use and shared between copies.
class TailModel {
public:
    [[nodiscard]] ModelKind kind() const noexcept { return kind_; }

    /// Sorted sample (evt and hindcast; empty for independence).
    [[nodiscard]] std::span<const double> body() const noexcept { return body_; }
    [[nodiscard]] const std::optional<evt::GpdFit>& fit() const noexcept { return fit_; }

    /// Marginals of the independence model (empty pmfs otherwise).
    [[nodiscard]] const DiscretePmf& demand_pmf() const;
    [[nodiscard]] const DiscretePmf& wind_pmf() const;
    /// Convolved D - W pmf of the independence model. Throws for other kinds.
    [[nodiscard]] const DiscretePmf& pmf() const;

    /// P(D - W > v).
    [[nodiscard]] double survivor(double v) const;
    /// Fraction of the sample strictly above v (evt and hindcast).
    [[nodiscard]] double empirical_survivor(double v) const;

    /// Smallest and largest attainable values; upper is +inf for an evt tail with xi >= 0.
    [[nodiscard]] double lower_support() const;
    [[nodiscard]] double upper_support() const;

private:
    struct Independence;

    friend TailModel build_evt_model_at(std::vector<double>, double, const evt::FitOptions&);
    friend TailModel build_hindcast_model(std::vector<double>);
    friend TailModel build_independence_model(std::span<const double>, std::span<const double>);

    ModelKind kind_ = ModelKind::hindcast;
    std::vector<double> body_;
    std::optional<evt::GpdFit> fit_;
    std::shared_ptr<Independence> independence_;
};

/// Threshold at the type-7 `threshold_quantile` of the sample, GPD fitted above it.
[[nodiscard]] TailModel build_evt_model(std::vector<double> dnw, double threshold_quantile,
                                        const evt::FitOptions& options = {});
/// As above with an explicit threshold (MW).
[[nodiscard]] TailModel build_evt_model_at(std::vector<double> dnw, double threshold,
                                           const evt::FitOptions& options = {});
[[nodiscard]] TailModel build_hindcast_model(std::vector<double> dnw);
[[nodiscard]] TailModel build_independence_model(std::span<const double> demand, std::span<const double> wind);

struct SupportBounds {
    std::int64_t lo = 0;  ///< first bin's left edge
    std::int64_t hi = 0;  ///< exclusive right edge of the last bin
};

/// [floor(min) - 1 GW, ceil(max) + 20 GW), widened for an evt tail until the mass
/// beyond `hi` is below 1e-13. Throws NumericalError for a tail too heavy to cover.
[[nodiscard]] SupportBounds default_bounds(const TailModel& model);

/// 1 MW pmf on [lo, hi): observations land in bin floor(x) - lo, continuous tail
/// mass is differenced at integer edges; the result is renormalized to 1.
/// Throws NumericalError when more than 1e-12 of the mass falls outside.
[[nodiscard]] DiscretePmf discretize(const TailModel& model, std::int64_t lo, std::int64_t hi);
[[nodiscard]] DiscretePmf discretize(const TailModel& model);

}  // namespace adequacy::dnw
