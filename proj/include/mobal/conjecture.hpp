#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mobal/pomdp.hpp"
#include "mobal/rng.hpp"

namespace mobal {

/// Raised by posterior_update when every conjecture assigns zero likelihood
/// to the observation; the caller decides the fallback.
struct degenerate_evidence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Finite conjecture space: one candidate model per parameter vector. The
/// true model, when misspecified, lives outside the space and is only used
/// by the diagnostic operations.
struct ConjectureSpace {
    std::vector<std::vector<double>> parameters;
    std::vector<PomdpModel> models;

    int size() const { return static_cast<int>(models.size()); }
};

inline void validate_space(const ConjectureSpace& space) {
    if (space.models.empty()) throw std::invalid_argument("ConjectureSpace: empty");
    if (space.parameters.size() != space.models.size())
        throw std::invalid_argument("ConjectureSpace: one parameter vector per model required");
    const PomdpModel& first = space.models.front();
    for (const PomdpModel& m : space.models)
        if (m.n_states != first.n_states || m.n_actions != first.n_actions ||
            m.n_observations != first.n_observations || m.discount != first.discount)
            throw std::invalid_argument("ConjectureSpace: models must share dimensions and discount");
}

/// Probability vector over the conjecture space.
using Posterior = std::vector<double>;

inline Posterior uniform_posterior(int size) {
    return Posterior(static_cast<std::size_t>(size), 1.0 / size);
}

inline void validate_posterior(const Posterior& rho, int size) {
    if (static_cast<int>(rho.size()) != size)
        throw std::invalid_argument("Posterior: wrong length");
    double sum = 0.0;
    for (double w : rho) {
        if (w < 0.0) throw std::invalid_argument("Posterior: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
        throw std::invalid_argument("Posterior: weights sum to " + std::to_string(sum));
}

/// Visited beliefs (uniform weight) and executed actions of a run; the
/// empirical quantities behind the discrepancy functional.
struct EmpiricalHistory {
    std::vector<Belief> beliefs;
    std::vector<int> actions;
};

/// One Bayes step over the conjecture space, computed in log space:
/// weights proportional to rho(i) * P(o | model_i, belief, action).
inline Posterior posterior_update(const ConjectureSpace& space, const Posterior& rho,
                                  const Belief& belief, int action, int obs) {
    int k = space.size();
    std::vector<double> log_w(k, -std::numeric_limits<double>::infinity());
    double max_log = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
        if (rho[i] <= 0.0) continue;
        double lik = observation_likelihood(space.models[i], belief, action, obs);
        if (lik <= 0.0) continue;
        log_w[i] = std::log(rho[i]) + std::log(lik);
        max_log = std::max(max_log, log_w[i]);
    }
    if (max_log == -std::numeric_limits<double>::infinity())
        throw degenerate_evidence("posterior_update: all conjectures assign zero likelihood");
    Posterior next(k, 0.0);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        if (log_w[i] == -std::numeric_limits<double>::infinity()) continue;
        next[i] = std::exp(log_w[i] - max_log);
        total += next[i];
    }
    for (double& w : next) w /= total;
    return next;
}

/// Monte-Carlo likelihood P(o | model, b, a) estimated by ancestral sampling
/// (s from b, s' from the transition, read z). Fallback for models too large
/// for the exact double sum.
inline double observation_likelihood_mc(const PomdpModel& m, const Belief& b, int a, int o,
                                        int samples, Rng& rng) {
    check_action(m, a);
    check_observation(m, o);
    if (samples <= 0) throw std::invalid_argument("observation_likelihood_mc: samples must be positive");
    double acc = 0.0;
    for (int k = 0; k < samples; ++k) {
        int s = sample_categorical(b, 1.0, rng);
        std::span<const double> row(
            &m.transition[(static_cast<std::size_t>(a) * m.n_states + s) * m.n_states],
            static_cast<std::size_t>(m.n_states));
        int s2 = sample_categorical(row, 1.0, rng);
        acc += m.obs(s2, o);
    }
    return acc / samples;
}

/// posterior_update with the Monte-Carlo likelihood.
inline Posterior posterior_update_mc(const ConjectureSpace& space, const Posterior& rho,
                                     const Belief& belief, int action, int obs, int samples,
                                     Rng& rng) {
    int k = space.size();
    Posterior weights(k, 0.0);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        if (rho[i] <= 0.0) continue;
        weights[i] = rho[i] * observation_likelihood_mc(space.models[i], belief, action, obs, samples, rng);
        total += weights[i];
    }
    if (total <= 0.0)
        throw degenerate_evidence("posterior_update_mc: all conjectures assign zero likelihood");
    for (double& w : weights) w /= total;
    return weights;
}

/// Draws a conjecture index from the posterior.
inline int sample_conjecture(const Posterior& rho, Rng& rng) {
    return sample_categorical(rho, 1.0, rng);
}

namespace detail {

/// Observation marginal under a model given one belief, with actions
/// integrated out by the empirical action frequencies.
inline std::vector<double> action_marginal_likelihood(const PomdpModel& m, const Belief& b,
                                                      const std::vector<double>& action_freq) {
    std::vector<double> p(m.n_observations, 0.0);
    for (int a = 0; a < m.n_actions; ++a) {
        if (action_freq[a] == 0.0) continue;
        for (int o = 0; o < m.n_observations; ++o)
            p[o] += action_freq[a] * observation_likelihood(m, b, a, o);
    }
    return p;
}

inline std::vector<double> empirical_action_freq(const EmpiricalHistory& hist, int n_actions) {
    if (hist.actions.empty()) throw std::invalid_argument("EmpiricalHistory: no actions recorded");
    std::vector<double> freq(n_actions, 0.0);
    for (int a : hist.actions) {
        if (a < 0 || a >= n_actions) throw std::invalid_argument("EmpiricalHistory: bad action");
        freq[a] += 1.0;
    }
    for (double& f : freq) f /= hist.actions.size();
    return freq;
}

}  // namespace detail

/// Discrepancy K(theta_bar, nu): mean over visited beliefs of the KL-style
/// gap between true and conjectured observation marginals, both
/// action-averaged by the global empirical action frequencies. Conventions:
/// 0 ln 0 = 0; a zero conjectured probability against positive true
/// probability yields +infinity. Diagnostic only — needs the true model.
inline double discrepancy(const ConjectureSpace& space, int idx, const PomdpModel& true_model,
                          const EmpiricalHistory& hist) {
    if (idx < 0 || idx >= space.size()) throw std::invalid_argument("discrepancy: bad index");
    if (hist.beliefs.empty()) throw std::invalid_argument("discrepancy: empty history");
    const PomdpModel& conj = space.models[idx];
    std::vector<double> freq = detail::empirical_action_freq(hist, true_model.n_actions);
    double total = 0.0;
    for (const Belief& b : hist.beliefs) {
        std::vector<double> p_true = detail::action_marginal_likelihood(true_model, b, freq);
        std::vector<double> p_conj = detail::action_marginal_likelihood(conj, b, freq);
        for (int o = 0; o < true_model.n_observations; ++o) {
            if (p_true[o] <= 0.0) continue;  // 0 ln 0 = 0
            if (p_conj[o] <= 0.0) return std::numeric_limits<double>::infinity();
            total += p_true[o] * std::log(p_true[o] / p_conj[o]);
        }
    }
    return total / hist.beliefs.size();
}

/// Indices whose discrepancy lies within tol of the minimum.
inline std::vector<int> consistent_set(const ConjectureSpace& space, const PomdpModel& true_model,
                                       const EmpiricalHistory& hist, double tol) {
    int k = space.size();
    std::vector<double> kvals(k);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
        kvals[i] = discrepancy(space, i, true_model, hist);
        best = std::min(best, kvals[i]);
    }
    std::vector<int> result;
    for (int i = 0; i < k; ++i) {
        if (std::isinf(best)) {
            if (std::isinf(kvals[i])) result.push_back(i);
        } else if (kvals[i] <= best + tol) {
            result.push_back(i);
        }
    }
    return result;
}

/// Finite-space form of the consistency gap: sum over conjectures of
/// (K(i) - min K) rho(i). Terms with rho(i)=0 contribute nothing even when
/// K(i) is infinite.
inline double posterior_gap(const ConjectureSpace& space, const PomdpModel& true_model,
                            const EmpiricalHistory& hist, const Posterior& rho) {
    int k = space.size();
    std::vector<double> kvals(k);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
        kvals[i] = discrepancy(space, i, true_model, hist);
        best = std::min(best, kvals[i]);
    }
    double gap = 0.0;
    for (int i = 0; i < k; ++i) {
        if (rho[i] == 0.0) continue;
        gap += (kvals[i] - best) * rho[i];
    }
    return gap;
}

}  // namespace mobal
