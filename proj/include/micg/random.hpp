#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace micg {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream) pairs.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

inline double standard_normal(Rng &rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double uniform01(Rng &rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Gamma(shape, rate).
inline double gamma_rate(Rng &rng, double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

/// Normal(mean, sd) truncated to [0, inf). Plain rejection when the bound sits in the bulk,
/// Robert's exponential proposal in the tail.
inline double truncated_normal_positive(Rng &rng, double mean, double sd) {
    const double a = -mean / sd; // standardised lower bound
    double z = 0.0;
    if (a < 0.45) {
        do {
            z = standard_normal(rng);
        } while (z < a);
    } else {
        const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
        std::exponential_distribution<double> expo(alpha);
        while (true) {
            z = a + expo(rng);
            const double d = z - alpha;
            if (uniform01(rng) <= std::exp(-0.5 * d * d)) {
                break;
            }
        }
    }
    return mean + sd * z;
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double inv_logit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace micg
