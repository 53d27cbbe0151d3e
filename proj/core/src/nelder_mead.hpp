#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace adequacy::detail {

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> point{};
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free Nelder-Mead minimization (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). Infeasible points should evaluate to +inf.
/// Converged means the largest vertex-to-vertex distance fell below `tolerance`
/// at a finite objective value.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, const std::array<double, N>& start, const std::array<double, N>& step,
                             double tolerance, int max_iterations) {
    using Point = std::array<double, N>;
    std::array<Point, N + 1> x{};
    std::array<double, N + 1> fx{};
    x[0] = start;
    for (std::size_t i = 0; i < N; ++i) {
        x[i + 1] = start;
        x[i + 1][i] += step[i];
    }
    for (std::size_t i = 0; i <= N; ++i) fx[i] = f(x[i]);

    const auto combine = [](const Point& a, const Point& b, double t) {
        Point out;
        for (std::size_t d = 0; d < N; ++d) out[d] = a[d] + t * (b[d] - a[d]);
        return out;
    };
    const auto diameter = [&] {
        double dmax = 0.0;
        for (std::size_t i = 0; i <= N; ++i) {
            for (std::size_t j = i + 1; j <= N; ++j) {
                double s = 0.0;
                for (std::size_t d = 0; d < N; ++d) s += (x[i][d] - x[j][d]) * (x[i][d] - x[j][d]);
                dmax = std::max(dmax, std::sqrt(s));
            }
        }
        return dmax;
    };

    SimplexResult<N> result;
    std::array<std::size_t, N + 1> order{};
    for (int iter = 0;; ++iter) {
        for (std::size_t i = 0; i <= N; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        const std::size_t best = order[0];
        const std::size_t worst = order[N];
        const std::size_t second = order[N - 1];

        result.iterations = iter;
        if (diameter() < tolerance) {
            result.converged = std::isfinite(fx[best]);
            break;
        }
        if (iter >= max_iterations) break;

        Point centroid{};
        for (std::size_t k = 0; k < N; ++k) {
            for (std::size_t d = 0; d < N; ++d) centroid[d] += x[order[k]][d] / static_cast<double>(N);
        }

        const Point reflected = combine(centroid, x[worst], -1.0);
        const double fr = f(reflected);
        if (fr < fx[best]) {
            const Point expanded = combine(centroid, x[worst], -2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                x[worst] = expanded;
                fx[worst] = fe;
            } else {
                x[worst] = reflected;
                fx[worst] = fr;
            }
            continue;
        }
        if (fr < fx[second]) {
            x[worst] = reflected;
            fx[worst] = fr;
            continue;
        }
        bool shrink = false;
        if (fr < fx[worst]) {
            const Point outside = combine(centroid, reflected, 0.5);
            const double fo = f(outside);
            if (fo <= fr) {
                x[worst] = outside;
                fx[worst] = fo;
            } else {
                shrink = true;
            }
        } else {
            const Point inside = combine(centroid, x[worst], 0.5);
            const double fi = f(inside);
            if (fi < fx[worst]) {
                x[worst] = inside;
                fx[worst] = fi;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t i = 0; i <= N; ++i) {
                if (i == best) continue;
                x[i] = combine(x[best], x[i], 0.5);
                fx[i] = f(x[i]);
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= N; ++i) {
        if (fx[i] < fx[best]) best = i;
    }
    result.point = x[best];
    result.value = fx[best];
    return result;
}

}  // namespace adequacy::detail
