#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace redsv {

/// PCG-XSH-RR 64/32. Output is identical on every platform, unlike the
/// standard library distributions, which is what the simulators rely on.
class Pcg32 {
public:
    using result_type = std::uint32_t;

    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0x14057b7ef767814fULL)
        : inc_((stream << 1) | 1u) {
        next();
        state_ += seed;
        next();
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return next(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        const std::uint64_t hi = next() >> 5;  // 27 bits
        const std::uint64_t lo = next() >> 6;  // 26 bits
        return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (cosine branch only, so each call
    /// consumes a fixed amount of the stream).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    result_type next() {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t state_ = 0;
    std::uint64_t inc_;
};

} // namespace redsv
