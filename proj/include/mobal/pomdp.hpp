#pragma once

#include <cmath>
#include <limits>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mobal {

/// Probability vector over states. Entries non-negative, sum 1 within 1e-9.
using Belief = std::vector<double>;

constexpr double kRowSumTolerance = 1e-9;

/// Raised when a conditioning observation has zero likelihood under the model.
/// Distinct from argument errors: callers have different correct fallbacks
/// (the particle filter re-propagates, the online loop falls back to a
/// prediction-only update).
struct impossible_observation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a requested construction would exceed a configured size guard.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Finite POMDP with dense row-major tensors.
///
/// transition[a][s][s'] — each (a,s) row a distribution over next states
/// observation[s'][o]   — each row a distribution over observations
/// cost[s][a]           — stage cost
struct PomdpModel {
    int n_states = 0;
    int n_actions = 0;
    int n_observations = 0;
    std::vector<double> transition;   // n_actions * n_states * n_states
    std::vector<double> observation;  // n_states * n_observations
    std::vector<double> cost;         // n_states * n_actions
    double discount = 0.99;

    double trans(int a, int s, int s2) const {
        return transition[(static_cast<std::size_t>(a) * n_states + s) * n_states + s2];
    }
    double& trans(int a, int s, int s2) {
        return transition[(static_cast<std::size_t>(a) * n_states + s) * n_states + s2];
    }
    double obs(int s2, int o) const {
        return observation[static_cast<std::size_t>(s2) * n_observations + o];
    }
    double& obs(int s2, int o) {
        return observation[static_cast<std::size_t>(s2) * n_observations + o];
    }
    double cost_at(int s, int a) const {
        return cost[static_cast<std::size_t>(s) * n_actions + a];
    }
    double& cost_at(int s, int a) {
        return cost[static_cast<std::size_t>(s) * n_actions + a];
    }
};

namespace detail {

/// Renormalizes a probability row in place. Drift within tol is accepted and
/// scaled out; anything larger is a construction error.
inline void normalize_row(double* row, int len, double tol, const char* what) {
    double sum = 0.0;
    for (int i = 0; i < len; ++i) {
        if (row[i] < 0.0 || row[i] > 1.0 + tol)
            throw std::invalid_argument(std::string(what) + ": entry outside [0,1]");
        sum += row[i];
    }
    if (std::abs(sum - 1.0) > tol)
        throw std::invalid_argument(std::string(what) + ": row sum " + std::to_string(sum) +
                                    " deviates from 1 beyond tolerance");
    if (std::abs(sum - 1.0) <= 8 * std::numeric_limits<double>::epsilon()) return;
    for (int i = 0; i < len; ++i) row[i] /= sum;
}

}  // namespace detail

/// Checks dimensions and stochasticity; renormalizes rows whose sums drift by
/// at most 1e-9 (Beta-binomial pmfs computed in floating point do not sum
/// exactly to 1). Throws std::invalid_argument on anything worse.
inline void validate_model(PomdpModel& m) {
    if (m.n_states <= 0 || m.n_actions <= 0 || m.n_observations <= 0)
        throw std::invalid_argument("PomdpModel: dimensions must be positive");
    if (!(m.discount > 0.0 && m.discount < 1.0))
        throw std::invalid_argument("PomdpModel: discount must lie in (0,1)");
    std::size_t nt = static_cast<std::size_t>(m.n_actions) * m.n_states * m.n_states;
    std::size_t nz = static_cast<std::size_t>(m.n_states) * m.n_observations;
    std::size_t nc = static_cast<std::size_t>(m.n_states) * m.n_actions;
    if (m.transition.size() != nt || m.observation.size() != nz || m.cost.size() != nc)
        throw std::invalid_argument("PomdpModel: tensor sizes do not match dimensions");
    for (int a = 0; a < m.n_actions; ++a)
        for (int s = 0; s < m.n_states; ++s)
            detail::normalize_row(&m.transition[(static_cast<std::size_t>(a) * m.n_states + s) * m.n_states],
                                  m.n_states, kRowSumTolerance, "transition");
    for (int s2 = 0; s2 < m.n_states; ++s2)
        detail::normalize_row(&m.observation[static_cast<std::size_t>(s2) * m.n_observations],
                              m.n_observations, kRowSumTolerance, "observation");
}

inline void validate_belief(const Belief& b) {
    double sum = 0.0;
    for (double p : b) {
        if (p < 0.0) throw std::invalid_argument("Belief: negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
        throw std::invalid_argument("Belief: entries sum to " + std::to_string(sum));
}

inline void check_action(const PomdpModel& m, int a) {
    if (a < 0 || a >= m.n_actions) throw std::invalid_argument("action index out of range");
}
inline void check_observation(const PomdpModel& m, int o) {
    if (o < 0 || o >= m.n_observations) throw std::invalid_argument("observation index out of range");
}

/// Expected stage cost of action a under belief b.
inline double belief_cost(const PomdpModel& m, const Belief& b, int a) {
    check_action(m, a);
    double c = 0.0;
    for (int s = 0; s < m.n_states; ++s) c += b[s] * m.cost_at(s, a);
    return c;
}

/// Probability of observing o after taking a from belief b:
/// sum over (s, s') of b(s) p(s'|s,a) z(o|s').
inline double observation_likelihood(const PomdpModel& m, const Belief& b, int a, int o) {
    check_action(m, a);
    check_observation(m, o);
    double p = 0.0;
    for (int s = 0; s < m.n_states; ++s) {
        if (b[s] == 0.0) continue;
        double inner = 0.0;
        for (int s2 = 0; s2 < m.n_states; ++s2) inner += m.trans(a, s, s2) * m.obs(s2, o);
        p += b[s] * inner;
    }
    return p;
}

/// One-step Bayes filter: predict through p(.|s,a), correct by z(o|.).
/// Throws impossible_observation when the normalizer is zero.
inline Belief belief_update(const PomdpModel& m, const Belief& b, int a, int o) {
    check_action(m, a);
    check_observation(m, o);
    Belief next(m.n_states, 0.0);
    double norm = 0.0;
    for (int s2 = 0; s2 < m.n_states; ++s2) {
        double pred = 0.0;
        for (int s = 0; s < m.n_states; ++s) pred += b[s] * m.trans(a, s, s2);
        next[s2] = m.obs(s2, o) * pred;
        norm += next[s2];
    }
    if (norm <= 0.0)
        throw impossible_observation("belief_update: observation " + std::to_string(o) +
                                     " has zero likelihood");
    for (double& p : next) p /= norm;
    return next;
}

/// Prediction-only step (no observation correction). Fallback used by callers
/// that receive an impossible observation.
inline Belief belief_predict(const PomdpModel& m, const Belief& b, int a) {
    check_action(m, a);
    Belief next(m.n_states, 0.0);
    for (int s2 = 0; s2 < m.n_states; ++s2)
        for (int s = 0; s < m.n_states; ++s) next[s2] += b[s] * m.trans(a, s, s2);
    return next;
}

/// Successor belief with its transition probability in the belief MDP.
struct BeliefTransition {
    Belief successor;
    double probability;
};

/// The finitely-supported belief-MDP kernel: one successor per observation
/// with positive likelihood; successors equal within `merge_tol`
/// componentwise are merged and their probabilities summed.
inline std::vector<BeliefTransition> belief_transition_support(const PomdpModel& m, const Belief& b,
                                                               int a, double merge_tol = 1e-12) {
    check_action(m, a);
    std::vector<BeliefTransition> support;
    for (int o = 0; o < m.n_observations; ++o) {
        double p = observation_likelihood(m, b, a, o);
        if (p <= 0.0) continue;
        Belief next = belief_update(m, b, a, o);
        bool merged = false;
        for (auto& entry : support) {
            bool equal = true;
            for (int s = 0; s < m.n_states; ++s)
                if (std::abs(entry.successor[s] - next[s]) > merge_tol) { equal = false; break; }
            if (equal) {
                entry.probability += p;
                merged = true;
                break;
            }
        }
        if (!merged) support.push_back({std::move(next), p});
    }
    return support;
}

// --- JSON (exact field names; arrays nested as indexed) ---

inline void to_json(nlohmann::json& j, const PomdpModel& m) {
    nlohmann::json trans = nlohmann::json::array();
    for (int a = 0; a < m.n_actions; ++a) {
        nlohmann::json rows = nlohmann::json::array();
        for (int s = 0; s < m.n_states; ++s) {
            nlohmann::json row = nlohmann::json::array();
            for (int s2 = 0; s2 < m.n_states; ++s2) row.push_back(m.trans(a, s, s2));
            rows.push_back(std::move(row));
        }
        trans.push_back(std::move(rows));
    }
    nlohmann::json obs = nlohmann::json::array();
    for (int s2 = 0; s2 < m.n_states; ++s2) {
        nlohmann::json row = nlohmann::json::array();
        for (int o = 0; o < m.n_observations; ++o) row.push_back(m.obs(s2, o));
        obs.push_back(std::move(row));
    }
    nlohmann::json cost = nlohmann::json::array();
    for (int s = 0; s < m.n_states; ++s) {
        nlohmann::json row = nlohmann::json::array();
        for (int a = 0; a < m.n_actions; ++a) row.push_back(m.cost_at(s, a));
        cost.push_back(std::move(row));
    }
    j = nlohmann::json{{"n_states", m.n_states},
                       {"n_actions", m.n_actions},
                       {"n_observations", m.n_observations},
                       {"transition", std::move(trans)},
                       {"observation", std::move(obs)},
                       {"cost", std::move(cost)},
                       {"discount", m.discount}};
}

inline void from_json(const nlohmann::json& j, PomdpModel& m) {
    m.n_states = j.at("n_states").get<int>();
    m.n_actions = j.at("n_actions").get<int>();
    m.n_observations = j.at("n_observations").get<int>();
    m.discount = j.at("discount").get<double>();
    m.transition.assign(static_cast<std::size_t>(m.n_actions) * m.n_states * m.n_states, 0.0);
    m.observation.assign(static_cast<std::size_t>(m.n_states) * m.n_observations, 0.0);
    m.cost.assign(static_cast<std::size_t>(m.n_states) * m.n_actions, 0.0);
    const auto& trans = j.at("transition");
    for (int a = 0; a < m.n_actions; ++a)
        for (int s = 0; s < m.n_states; ++s)
            for (int s2 = 0; s2 < m.n_states; ++s2)
                m.trans(a, s, s2) = trans.at(a).at(s).at(s2).get<double>();
    const auto& obs = j.at("observation");
    for (int s2 = 0; s2 < m.n_states; ++s2)
        for (int o = 0; o < m.n_observations; ++o) m.obs(s2, o) = obs.at(s2).at(o).get<double>();
    const auto& cost = j.at("cost");
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a) m.cost_at(s, a) = cost.at(s).at(a).get<double>();
    validate_model(m);
}

}  // namespace mobal
