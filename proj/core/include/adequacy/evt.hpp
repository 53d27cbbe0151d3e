#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adequacy::evt {

/// |xi| below this switches the GPD formulas to their exponential limits.
inline constexpr double kXiZeroGuard = 1e-6;

/// Fitting refuses samples with fewer exceedances than this.
inline constexpr std::size_t kMinExceedances = 30;

/// Generalized Pareto excess distribution, H(y) = 1 - (1 + xi*y/sigma)^(-1/xi).
struct GpdParams {
    double sigma = 1.0;  ///< scale (MW), positive
    double xi = 0.0;     ///< shape, signed

    /// Finite upper end of the support, -sigma/xi, when xi < 0.
    [[nodiscard]] std::optional<double> upper_endpoint() const;
};

/// H(y); 0 for y <= 0, 1 at and beyond a finite endpoint.
[[nodiscard]] double gpd_cdf(const GpdParams& params, double y);

/// 1 - H(y), evaluated directly to keep precision in the far tail.
[[nodiscard]] double gpd_survivor(const GpdParams& params, double y);

/// Inverse of gpd_cdf for p in [0, 1). p = 1 is allowed only when xi < 0 (the
/// endpoint). Throws DataError otherwise.
[[nodiscard]] double gpd_quantile(const GpdParams& params, double p);

/// Log-likelihood of strictly positive excesses. Returns -infinity when sigma <= 0
/// or any excess falls outside the support. Throws DataError on an empty sample or
/// a non-positive excess.
[[nodiscard]] double gpd_loglik(const GpdParams& params, std::span<const double> excesses);

struct FitOptions {
    double tolerance = 1e-8;    ///< simplex diameter in (ln sigma, xi)
    int max_iterations = 2000;  ///< per starting point
    bool standard_errors = true;
};

/// Maximum-likelihood estimate plus approximate (i.i.d.) standard errors.
struct MleResult {
    GpdParams params;
    double se_sigma = 0.0;
    double se_xi = 0.0;
    double log_likelihood = 0.0;
    int iterations = 0;
};

/// Nelder-Mead over (ln sigma, xi) restarted from the moment estimator, the
/// exponential fit and a heavy-tailed guess; the best converged optimum wins.
/// The search is confined to xi > -1, where the likelihood is bounded.
/// Standard errors come from a finite-difference Hessian at the optimum and are
/// NaN when that Hessian is not positive definite.
///
/// Throws DataError with fewer than kMinExceedances excesses and NumericalError
/// for a zero-variance sample or when no start converges.
[[nodiscard]] MleResult fit_gpd(std::span<const double> excesses, const FitOptions& options = {});

/// A peaks-over-threshold fit of a sample.
struct GpdFit {
    double threshold_mw = 0.0;
    GpdParams params;
    std::size_t n_exceedances = 0;
    std::size_t n_total = 0;
    double exceedance_prob = 0.0;  ///< n_exceedances / n_total
    double se_sigma = 0.0;
    double se_xi = 0.0;
    double log_likelihood = 0.0;
    double sigma_star = 0.0;  ///< sigma - threshold * xi

    /// Standard error of sigma_star ignoring the sigma/xi covariance term.
    [[nodiscard]] double se_sigma_star() const;
};

/// Excesses x - u of the values strictly above u (ties stay in the body).
[[nodiscard]] std::vector<double> excesses_over(std::span<const double> sample, double threshold);

/// Fits the excesses of `sample` over `threshold`.
[[nodiscard]] GpdFit fit_above_threshold(std::span<const double> sample, double threshold,
                                         const FitOptions& options = {});

/// Type-7 empirical quantile of the sample at `quantile_level` in (0, 1).
[[nodiscard]] double select_threshold(std::span<const double> sample, double quantile_level);

struct ScanEntry {
    double threshold_mw = 0.0;
    std::optional<GpdFit> fit;  ///< empty when the fit failed
    std::string failure;        ///< reason when `fit` is empty
};

struct ThresholdScan {
    std::vector<ScanEntry> entries;  ///< thresholds strictly increasing
};

/// Fits every threshold; failures are recorded, not thrown. Throws ConfigError on an
/// empty or non-increasing threshold list.
[[nodiscard]] ThresholdScan threshold_scan(std::span<const double> sample, std::span<const double> thresholds,
                                           const FitOptions& options = {});

/// lo, lo+step, ... <= hi (with a small tolerance for the last point).
[[nodiscard]] std::vector<double> threshold_grid(double lo, double hi, double step);

struct QqPoint {
    double model_mw = 0.0;
    double empirical_mw = 0.0;
};

/// Sorted excesses paired with model quantiles at plotting positions i/(k+1),
/// both shifted back to the data scale by the fit's threshold.
[[nodiscard]] std::vector<QqPoint> qq_points(const GpdFit& fit, std::span<const double> excesses);

}  // namespace adequacy::evt
