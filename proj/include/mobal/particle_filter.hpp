#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mobal/pomdp.hpp"
#include "mobal/rng.hpp"

namespace mobal {

/// Bootstrap particle filter state: M state-index particles.
struct ParticleSet {
    std::vector<int> particles;

    int m() const { return static_cast<int>(particles.size()); }

    static ParticleSet from_state(int state, int m) {
        return ParticleSet{std::vector<int>(static_cast<std::size_t>(m), state)};
    }

    /// Particles drawn iid from an initial belief.
    static ParticleSet from_belief(const Belief& b, int m, Rng& rng) {
        ParticleSet ps;
        ps.particles.reserve(m);
        for (int j = 0; j < m; ++j) ps.particles.push_back(sample_categorical(b, 1.0, rng));
        return ps;
    }
};

/// Empirical state frequencies of the particle set.
inline Belief particle_belief(const ParticleSet& ps, int n_states) {
    if (ps.particles.empty()) throw std::invalid_argument("particle_belief: empty particle set");
    Belief b(n_states, 0.0);
    double w = 1.0 / ps.m();
    for (int s : ps.particles) {
        if (s < 0 || s >= n_states) throw std::invalid_argument("particle_belief: bad particle state");
        b[s] += w;
    }
    return b;
}

/// One bootstrap step: propagate every particle through p(.|s,a), weight by
/// z(o|.), resample M particles with systematic resampling. If all weights
/// vanish the propagated set is kept unweighted (pure prediction) and
/// `zero_weight_events`, when given, is incremented.
inline ParticleSet particle_filter_step(const PomdpModel& m, const ParticleSet& ps, int a, int o,
                                        Rng& rng, long* zero_weight_events = nullptr) {
    check_action(m, a);
    check_observation(m, o);
    int count = ps.m();
    std::vector<int> propagated(count);
    std::vector<double> weights(count);
    double total = 0.0;
    for (int j = 0; j < count; ++j) {
        std::span<const double> row(
            &m.transition[(static_cast<std::size_t>(a) * m.n_states + ps.particles[j]) * m.n_states],
            static_cast<std::size_t>(m.n_states));
        propagated[j] = sample_categorical(row, 1.0, rng);
        weights[j] = m.obs(propagated[j], o);
        total += weights[j];
    }
    if (total <= 0.0) {
        if (zero_weight_events) ++*zero_weight_events;
        return ParticleSet{std::move(propagated)};
    }
    // systematic resampling: one uniform offset, stratified positions
    std::vector<int> resampled(count);
    double step = total / count;
    double u = uniform01(rng) * step;
    double cumulative = weights[0];
    int i = 0;
    for (int j = 0; j < count; ++j) {
        double target = u + j * step;
        while (target > cumulative && i + 1 < count) cumulative += weights[++i];
        resampled[j] = propagated[i];
    }
    return ParticleSet{std::move(resampled)};
}

/// Euclidean distance between two beliefs; the filter-accuracy metric.
inline double filter_error(const Belief& exact, const Belief& estimate) {
    if (exact.size() != estimate.size())
        throw std::invalid_argument("filter_error: length mismatch");
    double sq = 0.0;
    for (std::size_t s = 0; s < exact.size(); ++s) {
        double d = exact[s] - estimate[s];
        sq += d * d;
    }
    return std::sqrt(sq);
}

}  // namespace mobal
