#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace adequacy {

/// SplitMix64 (Steele, Lea, Flood 2014). Used for seeding and stream derivation.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman & Vigna). Output is identical on every platform for
/// a given seed; nothing here depends on the standard library's distributions.
///
/// Streams: `Xoshiro256StarStar(seed, stream)` gives an independent-looking
/// generator for each counter value, so replication r of a bootstrap draws the
/// same numbers whether replications run sequentially or in parallel.
class Xoshiro256StarStar {
public:
    static constexpr const char* kName = "xoshiro256** 1.0 seeded by SplitMix64";

    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    explicit Xoshiro256StarStar(std::uint64_t seed) noexcept;
    /// Raw state, for checking against the reference implementation. Not all zero.
    static Xoshiro256StarStar from_state(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2,
                                         std::uint64_t s3) noexcept {
        Xoshiro256StarStar g(0);
        g.s_[0] = s0;
        g.s_[1] = s1;
        g.s_[2] = s2;
        g.s_[3] = s3;
        return g;
    }
    Xoshiro256StarStar(std::uint64_t seed, std::uint64_t stream) noexcept;

    result_type operator()() noexcept { return next(); }
    result_type next() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform integer in [0, n) (Lemire's multiply-and-reject). n > 0.
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Standard normal variate (Marsaglia polar method).
    double normal() noexcept;

private:
    std::uint64_t s_[4];
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

inline Xoshiro256StarStar::Xoshiro256StarStar(std::uint64_t seed) noexcept {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
}

inline Xoshiro256StarStar::Xoshiro256StarStar(std::uint64_t seed, std::uint64_t stream) noexcept
    : Xoshiro256StarStar(seed ^ SplitMix64(stream ^ 0xD1B54A32D192ED03ULL).next()) {}

inline std::uint64_t Xoshiro256StarStar::next() noexcept {
    const auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

namespace detail {
__extension__ using uint128 = unsigned __int128;
}  // namespace detail

inline std::uint64_t Xoshiro256StarStar::below(std::uint64_t n) noexcept {
    detail::uint128 m = static_cast<detail::uint128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<detail::uint128>(next()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

inline double Xoshiro256StarStar::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * scale;
    has_spare_ = true;
    return u * scale;
}

}  // namespace adequacy
