#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace mobal {

/// Generator used throughout; every stochastic routine takes one explicitly
/// so that callers own their streams and runs are reproducible per seed.
using Rng = std::mt19937_64;

/// Derives an independent-looking stream from (seed, stream id). Used to give
/// the environment and the controller separate generators within one episode.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint64_t>(seed),
                      static_cast<std::uint64_t>(stream ^ 0x9e3779b97f4a7c15ull)};
    return Rng(seq);
}

/// Uniform draw in [0,1) with 53 bits, independent of library distribution
/// implementations (keeps trajectories bit-stable across standard libraries).
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Samples an index proportional to the (non-negative) weights.
/// `total` is the sum of weights; must be positive.
inline int sample_categorical(std::span<const double> weights, double total, Rng& rng) {
    if (total <= 0.0)
        throw std::invalid_argument("sample_categorical: non-positive total weight");
    double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;  // rounding tail
}

inline int sample_categorical(std::span<const double> weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    return sample_categorical(weights, total, rng);
}

}  // namespace mobal
