#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

// Distribution helpers with a fixed algorithm, so seeded streams are identical
// across standard libraries (std::*_distribution is implementation-defined).
namespace aia::rng {

using Engine = std::mt19937_64;

// Mixes a base seed with stream ids into one engine.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32)};
    return Engine(seq);
}

// [0, 1)
inline double uniform(Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

inline double uniform(Engine& e, double lo, double hi) { return lo + (hi - lo) * uniform(e); }

inline bool bernoulli(Engine& e, double p) { return uniform(e) < p; }

// [0, n), unbiased.
inline std::uint64_t index(Engine& e, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = 0;
    do {
        x = e();
    } while (x >= limit);
    return x % n;
}

// Box-Muller, one value per call.
inline double normal(Engine& e) {
    double u1 = uniform(e);
    while (u1 <= 0.0) u1 = uniform(e);
    const double u2 = uniform(e);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, Engine& e) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(index(e, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace aia::rng
