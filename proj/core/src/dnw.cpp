#include "adequacy/dnw.hpp"

#include "adequacy/error.hpp"
#include "adequacy/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <mutex>

namespace adequacy::dnw {

namespace {

constexpr double kUncoveredTolerance = 1e-12;
constexpr double kTailCoverage = 1e-13;
constexpr std::int64_t kMaxBins = 50'000'000;

std::int64_t floor_mw(double x) { return static_cast<std::int64_t>(std::floor(x)); }

}  // namespace

struct TailModel::Independence {
    DiscretePmf demand;
    DiscretePmf wind;
    std::once_flag once;
    DiscretePmf net;
};

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::evt: return "evt";
        case ModelKind::hindcast: return "hindcast";
        case ModelKind::independence: return "ind";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "evt") return ModelKind::evt;
    if (text == "hindcast") return ModelKind::hindcast;
    if (text == "ind" || text == "independence") return ModelKind::independence;
    throw ConfigError(fmt::format("unknown model kind '{}' (expected evt, hindcast or ind)", text));
}

DiscretePmf empirical_pmf(std::span<const double> values) {
    if (values.empty()) throw DataError("empirical distribution of an empty sample");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    if (!std::isfinite(*lo_it) || !std::isfinite(*hi_it)) throw DataError("non-finite value in sample");
    DiscretePmf pmf;
    pmf.origin_mw = floor_mw(*lo_it);
    std::vector<std::size_t> counts(static_cast<std::size_t>(floor_mw(*hi_it) - pmf.origin_mw + 1), 0);
    for (double v : values) ++counts[static_cast<std::size_t>(floor_mw(v) - pmf.origin_mw)];
    const auto n = static_cast<double>(values.size());
    pmf.probabilities.resize(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) pmf.probabilities[k] = static_cast<double>(counts[k]) / n;
    return pmf;
}

const DiscretePmf& TailModel::demand_pmf() const {
    static const DiscretePmf empty;
    return independence_ ? independence_->demand : empty;
}

const DiscretePmf& TailModel::wind_pmf() const {
    static const DiscretePmf empty;
    return independence_ ? independence_->wind : empty;
}

const DiscretePmf& TailModel::pmf() const {
    if (!independence_) throw ConfigError("only the independence model carries a convolved pmf");
    auto& ind = *independence_;
    std::call_once(ind.once, [&ind] {
        ind.net = difference(ind.demand, ind.wind);
        trim_zeros(ind.net);
    });
    return ind.net;
}

double TailModel::empirical_survivor(double v) const {
    if (body_.empty()) return pmf().survivor(v);
    const auto above = body_.end() - std::upper_bound(body_.begin(), body_.end(), v);
    return static_cast<double>(above) / static_cast<double>(body_.size());
}

double TailModel::survivor(double v) const {
    switch (kind_) {
        case ModelKind::hindcast: return empirical_survivor(v);
        case ModelKind::independence: return pmf().survivor(v);
        case ModelKind::evt: {
            const auto& f = *fit_;
            if (v < f.threshold_mw) return empirical_survivor(v);
            return f.exceedance_prob * evt::gpd_survivor(f.params, v - f.threshold_mw);
        }
    }
    return 0.0;
}

double TailModel::lower_support() const {
    if (kind_ == ModelKind::independence) {
        return static_cast<double>(independence_->demand.origin_mw - independence_->wind.last_mw());
    }
    return body_.front();
}

double TailModel::upper_support() const {
    switch (kind_) {
        case ModelKind::hindcast: return body_.back();
        case ModelKind::independence:
            return static_cast<double>(independence_->demand.last_mw() - independence_->wind.origin_mw);
        case ModelKind::evt: {
            const auto& f = *fit_;
            if (f.n_exceedances == 0) return body_.back();
            if (const auto end = f.params.upper_endpoint()) return f.threshold_mw + *end;
            return std::numeric_limits<double>::infinity();
        }
    }
    return body_.back();
}

TailModel build_evt_model_at(std::vector<double> dnw, double threshold, const evt::FitOptions& options) {
    if (dnw.empty()) throw DataError("EVT model of an empty sample");
    std::sort(dnw.begin(), dnw.end());
    TailModel model;
    model.kind_ = ModelKind::evt;
    model.fit_ = evt::fit_above_threshold(dnw, threshold, options);
    model.body_ = std::move(dnw);
    return model;
}

TailModel build_evt_model(std::vector<double> dnw, double threshold_quantile, const evt::FitOptions& options) {
    if (dnw.empty()) throw DataError("EVT model of an empty sample");
    std::sort(dnw.begin(), dnw.end());
    if (!(threshold_quantile > 0.0 && threshold_quantile < 1.0)) {
        throw ConfigError(fmt::format("threshold quantile {} must lie in (0, 1)", threshold_quantile));
    }
    const double u = quantile_type7_sorted(dnw, threshold_quantile);
    return build_evt_model_at(std::move(dnw), u, options);
}

TailModel build_hindcast_model(std::vector<double> dnw) {
    if (dnw.empty()) throw DataError("hindcast model of an empty sample");
    for (double v : dnw) {
        if (!std::isfinite(v)) throw DataError("non-finite demand-net-of-wind value");
    }
    std::sort(dnw.begin(), dnw.end());
    TailModel model;
    model.kind_ = ModelKind::hindcast;
    model.body_ = std::move(dnw);
    return model;
}

TailModel build_independence_model(std::span<const double> demand, std::span<const double> wind) {
    if (demand.empty() || wind.empty()) throw DataError("independence model needs non-empty demand and wind samples");
    TailModel model;
    model.kind_ = ModelKind::independence;
    model.independence_ = std::make_shared<TailModel::Independence>();
    model.independence_->demand = empirical_pmf(demand);
    model.independence_->wind = empirical_pmf(wind);
    return model;
}

SupportBounds default_bounds(const TailModel& model) {
    if (model.kind() == ModelKind::independence) {
        return {floor_mw(model.lower_support()), floor_mw(model.upper_support()) + 1};
    }
    SupportBounds b{floor_mw(model.lower_support()) - 1000,
                    static_cast<std::int64_t>(std::ceil(model.body().back())) + 20000};
    if (model.kind() == ModelKind::evt) {
        const auto& f = *model.fit();
        double top = 0.0;
        if (const auto end = f.params.upper_endpoint()) {
            top = f.threshold_mw + *end;
        } else if (f.exceedance_prob > kTailCoverage) {
            top = f.threshold_mw + evt::gpd_quantile(f.params, 1.0 - kTailCoverage / f.exceedance_prob);
        }
        if (!std::isfinite(top) || top - static_cast<double>(b.lo) > static_cast<double>(kMaxBins)) {
            throw NumericalError(fmt::format("GPD tail (sigma={:.6g}, xi={:.6g}) is too heavy to discretize", f.params.sigma,
                                             f.params.xi));
        }
        b.hi = std::max(b.hi, static_cast<std::int64_t>(std::ceil(top)) + 1);
    }
    return b;
}

DiscretePmf discretize(const TailModel& model, std::int64_t lo, std::int64_t hi) {
    if (!(lo < hi)) throw ConfigError(fmt::format("discretization range [{}, {}) is empty", lo, hi));
    if (hi - lo > kMaxBins) throw ConfigError(fmt::format("discretization range [{}, {}) is too wide", lo, hi));
    DiscretePmf pmf;
    pmf.origin_mw = lo;
    pmf.probabilities.assign(static_cast<std::size_t>(hi - lo), 0.0);
    double uncovered = 0.0;

    const auto deposit = [&](std::int64_t bin, double mass) {
        if (bin < lo || bin >= hi) {
            uncovered += mass;
        } else {
            pmf.probabilities[static_cast<std::size_t>(bin - lo)] += mass;
        }
    };

    switch (model.kind()) {
        case ModelKind::independence: {
            const auto& net = model.pmf();
            for (std::size_t k = 0; k < net.size(); ++k) {
                deposit(net.origin_mw + static_cast<std::int64_t>(k), net.probabilities[k]);
            }
            break;
        }
        case ModelKind::hindcast: {
            const auto body = model.body();
            const double w = 1.0 / static_cast<double>(body.size());
            for (double x : body) deposit(floor_mw(x), w);
            break;
        }
        case ModelKind::evt: {
            const auto body = model.body();
            const auto& f = *model.fit();
            const double w = 1.0 / static_cast<double>(body.size());
            for (double x : body) {
                if (x > f.threshold_mw) break;
                deposit(floor_mw(x), w);
            }
            const double u = f.threshold_mw;
            const double pu = f.exceedance_prob;
            std::int64_t edge = floor_mw(u);
            if (edge < lo) {
                // Tail mass left of the grid.
                const double s_lo = evt::gpd_survivor(f.params, static_cast<double>(lo) - u);
                uncovered += pu * (1.0 - s_lo);
                edge = lo;
            }
            double s_left = edge <= u ? 1.0 : evt::gpd_survivor(f.params, static_cast<double>(edge) - u);
            for (; edge < hi; ++edge) {
                const double s_right = evt::gpd_survivor(f.params, static_cast<double>(edge + 1) - u);
                pmf.probabilities[static_cast<std::size_t>(edge - lo)] += pu * (s_left - s_right);
                s_left = s_right;
                if (s_left == 0.0) break;
            }
            uncovered += pu * s_left;
            break;
        }
    }
    if (uncovered > kUncoveredTolerance) {
        throw NumericalError(fmt::format("discretization range [{}, {}) leaves {:.3g} of the probability mass uncovered",
                                         lo, hi, uncovered));
    }
    normalize(pmf);
    return pmf;
}

DiscretePmf discretize(const TailModel& model) {
    const auto b = default_bounds(model);
    return discretize(model, b.lo, b.hi);
}

}  // namespace adequacy::dnw
