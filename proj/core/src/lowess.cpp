#include "adequacy/error.hpp"
#include "adequacy/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

namespace adequacy::ingest {

namespace {

double tricube(double u) {
    const double t = 1.0 - u * u * u;
    return t * t * t;
}

double bisquare(double u) {
    const double t = 1.0 - u * u;
    return t * t;
}

// Local weighted linear fit at x[i] over the ns-point neighbourhood [left, right].
double local_fit(std::span<const double> x, std::span<const double> y, std::span<const double> robustness,
                 std::size_t i, std::size_t left, std::size_t right, std::vector<double>& w) {
    const std::size_t n = x.size();
    const double xi = x[i];
    const double h = std::max(xi - x[left], x[right] - xi);
    const double range = x[n - 1] - x[0];

    double total = 0.0;
    std::size_t end = left;
    for (std::size_t j = left; j < n; ++j) {
        w[j] = 0.0;
        const double r = std::abs(x[j] - xi);
        if (r <= 0.999 * h) {
            w[j] = (r <= 0.001 * h ? 1.0 : tricube(r / h)) * robustness[j];
            total += w[j];
        } else if (x[j] > xi) {
            break;
        }
        end = j + 1;
    }
    if (total <= 0.0) return y[i];
    for (std::size_t j = left; j < end; ++j) w[j] /= total;

    if (h > 0.0) {
        double centre = 0.0;
        for (std::size_t j = left; j < end; ++j) centre += w[j] * x[j];
        double spread = 0.0;
        for (std::size_t j = left; j < end; ++j) spread += w[j] * (x[j] - centre) * (x[j] - centre);
        if (std::sqrt(spread) > 0.001 * range) {
            const double slope = (xi - centre) / spread;
            for (std::size_t j = left; j < end; ++j) w[j] *= 1.0 + slope * (x[j] - centre);
        }
    }
    double fit = 0.0;
    for (std::size_t j = left; j < end; ++j) fit += w[j] * y[j];
    return fit;
}

}  // namespace

std::vector<double> lowess_fit(std::span<const double> x, std::span<const double> y, double span, int iterations) {
    const std::size_t n = x.size();
    if (y.size() != n) throw DataError("lowess: x and y lengths differ");
    if (n < 3) throw DataError(fmt::format("lowess needs at least 3 points, got {}", n));
    if (!(span > 0.0 && span <= 1.0)) throw ConfigError(fmt::format("lowess span {} must lie in (0, 1]", span));
    if (iterations < 0) throw ConfigError("lowess iteration count must be non-negative");
    if (!std::is_sorted(x.begin(), x.end())) throw DataError("lowess: abscissae must be ascending");

    const auto ns = static_cast<std::size_t>(span * static_cast<double>(n) + 1e-7);
    if (ns < 2) {
        throw ConfigError(fmt::format("lowess span {} leaves fewer than 2 points per neighbourhood (n = {})", span, n));
    }
    const std::size_t width = std::min(ns, n);

    std::vector<double> fitted(n);
    std::vector<double> robustness(n, 1.0);
    std::vector<double> w(n);
    std::vector<double> residuals(n);
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    const double yrange = *ymax - *ymin;

    for (int pass = 0; pass <= iterations; ++pass) {
        std::size_t left = 0;
        std::size_t right = width - 1;
        for (std::size_t i = 0; i < n; ++i) {
            // Slide the window right while that brings it closer to x[i].
            while (right + 1 < n && x[i] - x[left] > x[right + 1] - x[i]) {
                ++left;
                ++right;
            }
            fitted[i] = local_fit(x, y, robustness, i, left, right, w);
        }
        if (pass == iterations) break;

        for (std::size_t i = 0; i < n; ++i) residuals[i] = std::abs(y[i] - fitted[i]);
        std::vector<double> sorted = residuals;
        const std::size_t m1 = n / 2;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m1), sorted.end());
        double median = sorted[m1];
        if (n % 2 == 0) {
            const double below = *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m1));
            median = 0.5 * (median + below);
        }
        const double cmad = 6.0 * median;
        if (!(cmad > 1e-12 * yrange)) break;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = residuals[i];
            robustness[i] = r <= 0.001 * cmad ? 1.0 : (r > 0.999 * cmad ? 0.0 : bisquare(r / cmad));
        }
    }
    return fitted;
}

}  // namespace adequacy::ingest
