#include "adequacy/evt.hpp"

#include "adequacy/error.hpp"
#include "adequacy/stats.hpp"
#include "nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>

namespace adequacy::evt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool near_zero(double xi) { return std::abs(xi) < kXiZeroGuard; }

struct Objective {
    std::span<const double> y;
    double sum = 0.0;

    double operator()(const std::array<double, 2>& theta) const {
        const double xi = theta[1];
        if (!(xi > -1.0) || !std::isfinite(theta[0])) return kInf;
        const double sigma = std::exp(theta[0]);
        if (near_zero(xi)) return static_cast<double>(y.size()) * theta[0] + sum / sigma;
        const double r = xi / sigma;
        double acc = 0.0;
        for (double v : y) {
            const double t = r * v;
            if (!(t > -1.0)) return kInf;
            acc += std::log1p(t);
        }
        return static_cast<double>(y.size()) * theta[0] + (1.0 + 1.0 / xi) * acc;
    }
};

double negative_loglik(std::span<const double> y, double sigma, double xi) {
    const double ll = gpd_loglik({sigma, xi}, y);
    return std::isfinite(ll) ? -ll : kInf;
}

}  // namespace

std::optional<double> GpdParams::upper_endpoint() const {
    if (xi < 0.0 && !near_zero(xi)) return -sigma / xi;
    return std::nullopt;
}

double gpd_cdf(const GpdParams& p, double y) {
    if (y <= 0.0) return 0.0;
    if (near_zero(p.xi)) return -std::expm1(-y / p.sigma);
    if (p.xi < 0.0 && y >= -p.sigma / p.xi) return 1.0;
    return -std::expm1(-std::log1p(p.xi * y / p.sigma) / p.xi);
}

double gpd_survivor(const GpdParams& p, double y) {
    if (y <= 0.0) return 1.0;
    if (near_zero(p.xi)) return std::exp(-y / p.sigma);
    if (p.xi < 0.0 && y >= -p.sigma / p.xi) return 0.0;
    return std::exp(-std::log1p(p.xi * y / p.sigma) / p.xi);
}

double gpd_quantile(const GpdParams& p, double prob) {
    if (!(prob >= 0.0) || prob > 1.0) throw DataError(fmt::format("GPD quantile level {} outside [0, 1)", prob));
    if (prob == 0.0) return 0.0;
    if (prob == 1.0) {
        if (const auto end = p.upper_endpoint()) return *end;
        throw DataError("GPD quantile at p = 1 is infinite for xi >= 0");
    }
    const double log_tail = std::log1p(-prob);
    if (near_zero(p.xi)) return -p.sigma * log_tail;
    return p.sigma / p.xi * std::expm1(-p.xi * log_tail);
}

double gpd_loglik(const GpdParams& p, std::span<const double> excesses) {
    if (excesses.empty()) throw DataError("GPD log-likelihood of an empty sample");
    for (double y : excesses) {
        if (!(y > 0.0)) throw DataError(fmt::format("GPD excesses must be positive, got {}", y));
    }
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.xi)) return -kInf;
    const auto k = static_cast<double>(excesses.size());
    if (near_zero(p.xi)) {
        const double s = std::accumulate(excesses.begin(), excesses.end(), 0.0);
        return -k * std::log(p.sigma) - s / p.sigma;
    }
    double acc = 0.0;
    for (double y : excesses) {
        const double t = p.xi * y / p.sigma;
        if (!(t > -1.0)) return -kInf;
        acc += std::log1p(t);
    }
    return -k * std::log(p.sigma) - (1.0 + 1.0 / p.xi) * acc;
}

MleResult fit_gpd(std::span<const double> excesses, const FitOptions& options) {
    if (excesses.size() < kMinExceedances) {
        throw DataError(fmt::format("GPD fit needs at least {} exceedances, got {}", kMinExceedances, excesses.size()));
    }
    for (double y : excesses) {
        if (!(y > 0.0) || !std::isfinite(y)) throw DataError(fmt::format("GPD excesses must be positive, got {}", y));
    }
    const double m = mean(excesses);
    const double v = variance(excesses);
    const double ymax = *std::max_element(excesses.begin(), excesses.end());
    if (!(v > 0.0) || !(v > 1e-24 * m * m)) {
        throw NumericalError("GPD fit: all excesses are identical (degenerate sample)");
    }

    Objective objective{excesses, std::accumulate(excesses.begin(), excesses.end(), 0.0)};

    // Moment estimator, made feasible for short tails.
    double xi_mom = std::clamp(0.5 * (1.0 - m * m / v), -0.9, 0.9);
    double sigma_mom = 0.5 * m * (m * m / v + 1.0);
    if (xi_mom < 0.0) sigma_mom = std::max(sigma_mom, -xi_mom * ymax * 1.05);

    const std::array<std::array<double, 2>, 3> starts{{
        {std::log(sigma_mom), xi_mom},
        {std::log(m), 0.0},
        {std::log(0.8 * m), 0.2},
    }};

    detail::SimplexResult<2> best;
    bool have_best = false;
    std::optional<detail::SimplexResult<2>> fallback;
    int total_iterations = 0;
    for (const auto& start : starts) {
        const auto r = detail::nelder_mead<2>(objective, start, {0.1, 0.1}, options.tolerance, options.max_iterations);
        total_iterations += r.iterations;
        if (r.converged && (!have_best || r.value < best.value)) {
            best = r;
            have_best = true;
        }
        if (!fallback || r.value < fallback->value) fallback = r;
    }
    if (!have_best) {
        const double sigma = std::exp(fallback->point[0]);
        const double xi = fallback->point[1];
        const double hs = 1e-5 * (1.0 + std::abs(sigma));
        const double hx = 1e-5 * (1.0 + std::abs(xi));
        const double gs = (negative_loglik(excesses, sigma + hs, xi) - negative_loglik(excesses, sigma - hs, xi)) / (2 * hs);
        const double gx = (negative_loglik(excesses, sigma, xi + hx) - negative_loglik(excesses, sigma, xi - hx)) / (2 * hx);
        throw NumericalError(fmt::format(
            "GPD fit did not converge: final gradient norm {:.3g} after {} iterations (sigma={:.6g}, xi={:.6g})",
            std::hypot(gs, gx), total_iterations, sigma, xi));
    }

    MleResult result;
    result.params = {std::exp(best.point[0]), best.point[1]};
    result.log_likelihood = gpd_loglik(result.params, excesses);
    result.iterations = total_iterations;
    result.se_sigma = std::numeric_limits<double>::quiet_NaN();
    result.se_xi = std::numeric_limits<double>::quiet_NaN();

    if (options.standard_errors) {
        const double s = result.params.sigma;
        const double x = result.params.xi;
        const double hs = 1e-5 * (1.0 + std::abs(s));
        const double hx = 1e-5 * (1.0 + std::abs(x));
        const auto f = [&](double ds, double dx) { return negative_loglik(excesses, s + ds, x + dx); };
        const double f0 = f(0, 0);
        const double a = (f(hs, 0) - 2 * f0 + f(-hs, 0)) / (hs * hs);
        const double c = (f(0, hx) - 2 * f0 + f(0, -hx)) / (hx * hx);
        const double b = (f(hs, hx) - f(hs, -hx) - f(-hs, hx) + f(-hs, -hx)) / (4 * hs * hx);
        const double det = a * c - b * b;
        if (std::isfinite(det) && a > 0.0 && det > 0.0) {
            result.se_sigma = std::sqrt(c / det);
            result.se_xi = std::sqrt(a / det);
        }
    }
    return result;
}

double GpdFit::se_sigma_star() const {
    return std::sqrt(se_sigma * se_sigma + threshold_mw * threshold_mw * se_xi * se_xi);
}

std::vector<double> excesses_over(std::span<const double> sample, double threshold) {
    std::vector<double> out;
    for (double x : sample) {
        if (x > threshold) out.push_back(x - threshold);
    }
    return out;
}

GpdFit fit_above_threshold(std::span<const double> sample, double threshold, const FitOptions& options) {
    if (sample.empty()) throw DataError("cannot fit a GPD to an empty sample");
    const auto excess = excesses_over(sample, threshold);
    const auto mle = fit_gpd(excess, options);
    GpdFit fit;
    fit.threshold_mw = threshold;
    fit.params = mle.params;
    fit.n_exceedances = excess.size();
    fit.n_total = sample.size();
    fit.exceedance_prob = static_cast<double>(excess.size()) / static_cast<double>(sample.size());
    fit.se_sigma = mle.se_sigma;
    fit.se_xi = mle.se_xi;
    fit.log_likelihood = mle.log_likelihood;
    fit.sigma_star = fit.params.sigma - threshold * fit.params.xi;
    return fit;
}

double select_threshold(std::span<const double> sample, double quantile_level) {
    if (!(quantile_level > 0.0 && quantile_level < 1.0)) {
        throw ConfigError(fmt::format("threshold quantile {} must lie in (0, 1)", quantile_level));
    }
    if (sample.empty()) throw DataError("cannot select a threshold for an empty sample");
    return quantile_type7(sample, quantile_level);
}

ThresholdScan threshold_scan(std::span<const double> sample, std::span<const double> thresholds,
                             const FitOptions& options) {
    if (thresholds.empty()) throw ConfigError("threshold scan needs at least one threshold");
    for (std::size_t i = 1; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > thresholds[i - 1])) throw ConfigError("scan thresholds must be strictly increasing");
    }
    ThresholdScan scan;
    scan.entries.reserve(thresholds.size());
    for (double u : thresholds) {
        ScanEntry entry{u, std::nullopt, {}};
        try {
            entry.fit = fit_above_threshold(sample, u, options);
        } catch (const Error& e) {
            entry.failure = e.what();
        }
        scan.entries.push_back(std::move(entry));
    }
    return scan;
}

std::vector<double> threshold_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw ConfigError(fmt::format("invalid scan range {}:{}:{}", lo, hi, step));
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

std::vector<QqPoint> qq_points(const GpdFit& fit, std::span<const double> excesses) {
    if (excesses.empty()) throw DataError("QQ plot of an empty excess sample");
    const auto sorted = sorted_copy(excesses);
    const auto k = static_cast<double>(sorted.size());
    std::vector<QqPoint> out;
    out.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double pos = static_cast<double>(i + 1) / (k + 1.0);
        out.push_back({fit.threshold_mw + gpd_quantile(fit.params, pos), fit.threshold_mw + sorted[i]});
    }
    return out;
}

}  // namespace adequacy::evt
