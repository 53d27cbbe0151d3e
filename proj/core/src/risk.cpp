#include "adequacy/risk.hpp"

#include "adequacy/error.hpp"
#include "adequacy/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace adequacy::risk {

DiscretePmf balance_distribution(const DiscretePmf& fleet, const DiscretePmf& dnw) {
    if (fleet.empty() || dnw.empty()) throw DataError("balance distribution needs non-empty pmfs");
    return difference(fleet, dnw);
}

RiskMetrics compute_metrics(const DiscretePmf& z, double n_hours) {
    if (!(n_hours > 0.0)) throw ConfigError("season length must be positive");
    RiskMetrics m;
    m.n_hours = n_hours;
    double p = 0.0;
    double depth = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const auto value = z.origin_mw + static_cast<std::int64_t>(k);
        if (value >= 0) break;
        p += z.probabilities[k];
        depth += z.probabilities[k] * static_cast<double>(-value);
    }
    m.p_shortfall = p;
    m.lole_hours = n_hours * p;
    m.eeu_mwh = n_hours * depth;
    return m;
}

ShortfallKernel::ShortfallKernel(const DiscretePmf& fleet) : origin_(fleet.origin_mw), mean_(fleet.mean()) {
    if (fleet.empty()) throw DataError("shortfall kernel of an empty fleet distribution");
    const std::size_t n = fleet.size();
    below_.resize(n + 1);
    deficit_.resize(n + 1);
    below_[0] = 0.0;
    deficit_[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        below_[k + 1] = below_[k] + fleet.probabilities[k];
        deficit_[k + 1] = deficit_[k] + below_[k + 1];
    }
}

double ShortfallKernel::prob_below(std::int64_t v) const noexcept {
    if (v <= origin_) return 0.0;
    const auto k = static_cast<std::size_t>(v - origin_);
    return k < below_.size() ? below_[k] : below_.back();
}

double ShortfallKernel::expected_deficit(std::int64_t v) const noexcept {
    if (v <= origin_) return 0.0;
    const auto k = static_cast<std::size_t>(v - origin_);
    if (k < deficit_.size()) return deficit_[k];
    // Beyond the top of the fleet every outcome is short: E[v - X].
    return static_cast<double>(v) - mean_;
}

RiskMetrics shortfall_metrics(const ShortfallKernel& kernel, const DiscretePmf& dnw, double n_hours) {
    if (!(n_hours > 0.0)) throw ConfigError("season length must be positive");
    double p = 0.0;
    double depth = 0.0;
    const auto first = std::max<std::int64_t>(0, kernel.min_capacity() + 1 - dnw.origin_mw);
    for (auto k = static_cast<std::size_t>(first); k < dnw.size(); ++k) {
        const double mass = dnw.probabilities[k];
        if (mass == 0.0) continue;
        const auto v = dnw.origin_mw + static_cast<std::int64_t>(k);
        p += mass * kernel.prob_below(v);
        depth += mass * kernel.expected_deficit(v);
    }
    RiskMetrics m;
    m.n_hours = n_hours;
    m.p_shortfall = p;
    m.lole_hours = n_hours * p;
    m.eeu_mwh = n_hours * depth;
    return m;
}

RiskMetrics independence_metrics(const ShortfallKernel& kernel, const DiscretePmf& demand, const DiscretePmf& wind,
                                 double n_hours) {
    if (!(n_hours > 0.0)) throw ConfigError("season length must be positive");
    if (demand.empty() || wind.empty()) throw DataError("independence metrics need non-empty marginals");
    double p = 0.0;
    double depth = 0.0;
    const std::int64_t floor_v = kernel.min_capacity();
    for (std::size_t i = demand.size(); i-- > 0;) {
        const double pd = demand.probabilities[i];
        if (pd == 0.0) continue;
        const auto d = demand.origin_mw + static_cast<std::int64_t>(i);
        // Need d - w > floor_v, i.e. w < d - floor_v.
        const std::int64_t w_limit = d - floor_v;
        if (w_limit <= wind.origin_mw) continue;
        const auto count = static_cast<std::size_t>(std::min<std::int64_t>(w_limit - wind.origin_mw,
                                                                          static_cast<std::int64_t>(wind.size())));
        double pi = 0.0;
        double di = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            const double pw = wind.probabilities[j];
            if (pw == 0.0) continue;
            const auto v = d - (wind.origin_mw + static_cast<std::int64_t>(j));
            pi += pw * kernel.prob_below(v);
            di += pw * kernel.expected_deficit(v);
        }
        p += pd * pi;
        depth += pd * di;
    }
    RiskMetrics m;
    m.n_hours = n_hours;
    m.p_shortfall = p;
    m.lole_hours = n_hours * p;
    m.eeu_mwh = n_hours * depth;
    return m;
}

RiskMetrics model_risk(const dnw::TailModel& model, const ShortfallKernel& kernel, double n_hours) {
    if (model.kind() == dnw::ModelKind::independence) {
        return independence_metrics(kernel, model.demand_pmf(), model.wind_pmf(), n_hours);
    }
    return shortfall_metrics(kernel, dnw::discretize(model), n_hours);
}

dnw::TailModel build_model(std::span<const double> demand, std::span<const double> wind,
                           const SeasonRiskOptions& options) {
    if (demand.size() != wind.size()) throw DataError("demand and wind samples must be paired");
    if (options.kind == dnw::ModelKind::independence) return dnw::build_independence_model(demand, wind);
    std::vector<double> net(demand.size());
    for (std::size_t i = 0; i < net.size(); ++i) net[i] = demand[i] - wind[i];
    if (options.kind == dnw::ModelKind::hindcast) return dnw::build_hindcast_model(std::move(net));
    return dnw::build_evt_model(std::move(net), options.threshold_quantile, options.fit);
}

RiskMetrics sample_risk(std::span<const double> demand, std::span<const double> wind, const ShortfallKernel& kernel,
                        const SeasonRiskOptions& options, double n_hours) {
    return model_risk(build_model(demand, wind, options), kernel, n_hours);
}

RiskMetrics season_risk(const ingest::SeasonTrace& trace, const ShortfallKernel& kernel,
                        const SeasonRiskOptions& options) {
    const auto d = trace.demand();
    const auto w = trace.wind();
    return sample_risk(d, w, kernel, options, static_cast<double>(trace.hours.size()));
}

RiskMetrics long_run_mean(std::span<const RiskMetrics> per_season) {
    if (per_season.empty()) throw DataError("long-run mean of an empty season list");
    RiskMetrics m;
    for (const auto& s : per_season) {
        m.lole_hours += s.lole_hours;
        m.eeu_mwh += s.eeu_mwh;
        m.n_hours += s.n_hours;
        m.p_shortfall += s.p_shortfall;
    }
    const auto n = static_cast<double>(per_season.size());
    m.lole_hours /= n;
    m.eeu_mwh /= n;
    m.n_hours /= n;
    m.p_shortfall /= n;
    return m;
}

}  // namespace adequacy::risk
