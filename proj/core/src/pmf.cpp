#include "adequacy/pmf.hpp"

#include "adequacy/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adequacy {

double DiscretePmf::at(std::int64_t mw) const noexcept {
    if (mw < origin_mw || mw > last_mw()) return 0.0;
    return probabilities[static_cast<std::size_t>(mw - origin_mw)];
}

double DiscretePmf::total() const noexcept {
    return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

double DiscretePmf::mean() const noexcept {
    double m = 0.0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        m += probabilities[k] * static_cast<double>(origin_mw + static_cast<std::int64_t>(k));
    }
    return m;
}

double DiscretePmf::survivor(double v) const noexcept {
    if (probabilities.empty()) return 0.0;
    // First bin whose point strictly exceeds v.
    const double first = std::floor(v) + 1.0 - static_cast<double>(origin_mw);
    if (first <= 0.0) return std::min(1.0, total());
    if (first >= static_cast<double>(probabilities.size())) return 0.0;
    const auto k = static_cast<std::size_t>(first);
    double s = 0.0;
    for (std::size_t i = probabilities.size(); i-- > k;) s += probabilities[i];
    return s;
}

void trim_zeros(DiscretePmf& pmf) {
    auto& p = pmf.probabilities;
    const auto first = std::find_if(p.begin(), p.end(), [](double x) { return x != 0.0; });
    if (first == p.end()) {
        p.clear();
        return;
    }
    const auto last = std::find_if(p.rbegin(), p.rend(), [](double x) { return x != 0.0; }).base();
    pmf.origin_mw += std::distance(p.begin(), first);
    p = std::vector<double>(first, last);
}

void normalize(DiscretePmf& pmf) {
    const double t = pmf.total();
    if (!(t > 0.0) || !std::isfinite(t)) throw NumericalError("cannot normalize a pmf with non-positive mass");
    for (auto& x : pmf.probabilities) x /= t;
}

namespace {

// Direct convolution skipping zero-mass bins of the sparser operand.
DiscretePmf convolve(const DiscretePmf& a, const std::vector<double>& b, std::int64_t origin) {
    DiscretePmf out;
    if (a.empty() || b.empty()) return out;
    out.origin_mw = origin;
    out.probabilities.assign(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double pa = a.probabilities[i];
        if (pa == 0.0) continue;
        double* dst = out.probabilities.data() + i;
        for (std::size_t j = 0; j < b.size(); ++j) dst[j] += pa * b[j];
    }
    return out;
}

}  // namespace

DiscretePmf difference(const DiscretePmf& a, const DiscretePmf& b) {
    std::vector<double> reflected(b.probabilities.rbegin(), b.probabilities.rend());
    return convolve(a, reflected, a.origin_mw - b.last_mw());
}

DiscretePmf sum(const DiscretePmf& a, const DiscretePmf& b) {
    return convolve(a, b.probabilities, a.origin_mw + b.origin_mw);
}

}  // namespace adequacy
