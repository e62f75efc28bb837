#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mobal/pomdp.hpp"
#include "mobal/rng.hpp"

namespace mobal::netsys {

/// Beta-binomial alert distribution for one component.
struct BetaBinomial {
    int trials = 7;
    double alpha = 1.0;
    double beta = 0.7;
};

/// pmf of BetaBin(trials, alpha, beta_param) at k, via log-gamma.
inline double betabin_pmf(int trials, double alpha, double beta_param, int k) {
    if (k < 0 || k > trials) throw std::invalid_argument("betabin_pmf: k out of range");
    if (alpha <= 0.0 || beta_param <= 0.0)
        throw std::invalid_argument("betabin_pmf: shape parameters must be positive");
    double log_choose = std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0);
    double log_beta_num = std::lgamma(k + alpha) + std::lgamma(trials - k + beta_param) -
                          std::lgamma(trials + alpha + beta_param);
    double log_beta_den = std::lgamma(alpha) + std::lgamma(beta_param) - std::lgamma(alpha + beta_param);
    return std::exp(log_choose + log_beta_num - log_beta_den);
}

/// N networked components, each safe (0) or compromised (1). Compromise
/// propagates along the component graph; per-component block actions recover
/// compromised components and shield safe ones for the step.
struct NetSysConfig {
    int n_components = 1;
    std::vector<std::vector<int>> adjacency;  // symmetric 0/1, zero diagonal
    double p_attack = 0.2;
    int max_alerts = 7;
    BetaBinomial betabin_compromised{7, 1.0, 0.7};
    BetaBinomial betabin_safe{7, 0.7, 3.0};
    double discount = 0.99;

    /// Path topology 0-1-2-...; any symmetric graph works, the path is only
    /// the default.
    static NetSysConfig path(int n_components, double p_attack = 0.2) {
        NetSysConfig cfg;
        cfg.n_components = n_components;
        cfg.p_attack = p_attack;
        cfg.adjacency.assign(n_components, std::vector<int>(n_components, 0));
        for (int l = 0; l + 1 < n_components; ++l) {
            cfg.adjacency[l][l + 1] = 1;
            cfg.adjacency[l + 1][l] = 1;
        }
        return cfg;
    }
};

inline void validate_config(const NetSysConfig& cfg) {
    int n = cfg.n_components;
    if (n <= 0) throw std::invalid_argument("NetSysConfig: n_components must be positive");
    if (!(cfg.p_attack > 0.0 && cfg.p_attack <= 1.0))
        throw std::invalid_argument("NetSysConfig: p_attack must lie in (0,1]");
    if (cfg.max_alerts <= 0) throw std::invalid_argument("NetSysConfig: max_alerts must be positive");
    if (static_cast<int>(cfg.adjacency.size()) != n)
        throw std::invalid_argument("NetSysConfig: adjacency must be NxN");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(cfg.adjacency[i].size()) != n)
            throw std::invalid_argument("NetSysConfig: adjacency must be NxN");
        if (cfg.adjacency[i][i] != 0) throw std::invalid_argument("NetSysConfig: nonzero diagonal");
        for (int k = 0; k < n; ++k)
            if (cfg.adjacency[i][k] != cfg.adjacency[k][i])
                throw std::invalid_argument("NetSysConfig: adjacency must be symmetric");
    }
    if (cfg.betabin_compromised.trials > cfg.max_alerts || cfg.betabin_safe.trials > cfg.max_alerts)
        throw std::invalid_argument("NetSysConfig: betabin trials exceed max_alerts");
}

// Joint indices are mixed-radix with component 0 least significant:
// states/actions base 2, observations base (max_alerts+1).
inline int component_state(int state_index, int l) { return (state_index >> l) & 1; }
inline int component_action(int action_index, int l) { return (action_index >> l) & 1; }
inline int component_alerts(int obs_index, int l, int base) {
    for (int i = 0; i < l; ++i) obs_index /= base;
    return obs_index % base;
}

/// Number of compromised neighbors of component l in joint state s.
inline int compromised_neighbors(const NetSysConfig& cfg, int state_index, int l) {
    int count = 0;
    for (int k = 0; k < cfg.n_components; ++k)
        if (cfg.adjacency[l][k] && component_state(state_index, k)) ++count;
    return count;
}

/// min{p_attack (1 + N_l(s)), 1} for a currently safe component l.
inline double compromise_prob(const NetSysConfig& cfg, int state_index, int l,
                              std::optional<double> p_override = std::nullopt) {
    if (l < 0 || l >= cfg.n_components) throw std::invalid_argument("compromise_prob: bad component");
    if (component_state(state_index, l) != 0)
        throw std::invalid_argument("compromise_prob: component already compromised");
    double p = p_override.value_or(cfg.p_attack);
    return std::min(p * (1.0 + compromised_neighbors(cfg, state_index, l)), 1.0);
}

/// Stage cost: 2 per unmitigated intrusion plus 1 per blocked component.
inline double stage_cost(int state_index, int action_index, int n_components) {
    double c = 0.0;
    for (int l = 0; l < n_components; ++l) {
        int s = component_state(state_index, l);
        int a = component_action(action_index, l);
        c += 2.0 * s * (1 - a) + a;
    }
    return c;
}

constexpr int kMaxComponents = 4;  // 2^N * 2^N * (max_alerts+1)^N tensor guard

/// Builds the joint PomdpModel. Transitions factor over components given the
/// pre-transition joint state (synchronous update): a blocked component ends
/// the step safe regardless of its state; an unblocked compromised component
/// stays compromised; an unblocked safe component is compromised with
/// compromise_prob. Observation rows are products of per-component
/// Beta-binomial pmfs selected by the post-transition component state.
/// p_override, when given, replaces p_attack (conjectured models).
inline PomdpModel build_model(const NetSysConfig& cfg,
                              std::optional<double> p_override = std::nullopt) {
    validate_config(cfg);
    int n = cfg.n_components;
    if (n > kMaxComponents)
        throw capacity_error("build_model: N=" + std::to_string(n) + " exceeds the N<=4 guard");
    if (p_override && !(*p_override >= 0.0 && *p_override <= 1.0))
        throw std::invalid_argument("build_model: p_override outside [0,1]");

    PomdpModel m;
    m.n_states = 1 << n;
    m.n_actions = 1 << n;
    int base = cfg.max_alerts + 1;
    m.n_observations = 1;
    for (int l = 0; l < n; ++l) m.n_observations *= base;
    m.discount = cfg.discount;
    m.transition.assign(static_cast<std::size_t>(m.n_actions) * m.n_states * m.n_states, 0.0);
    m.observation.assign(static_cast<std::size_t>(m.n_states) * m.n_observations, 0.0);
    m.cost.assign(static_cast<std::size_t>(m.n_states) * m.n_actions, 0.0);

    for (int a = 0; a < m.n_actions; ++a) {
        for (int s = 0; s < m.n_states; ++s) {
            // per-component probability of ending compromised
            std::vector<double> p_comp(n);
            for (int l = 0; l < n; ++l) {
                int sl = component_state(s, l);
                int al = component_action(a, l);
                if (al == 1)
                    p_comp[l] = 0.0;  // recovery / shielded
                else if (sl == 1)
                    p_comp[l] = 1.0;  // persists until recovery
                else
                    p_comp[l] = compromise_prob(cfg, s, l, p_override);
            }
            for (int s2 = 0; s2 < m.n_states; ++s2) {
                double p = 1.0;
                for (int l = 0; l < n; ++l)
                    p *= component_state(s2, l) ? p_comp[l] : 1.0 - p_comp[l];
                m.trans(a, s, s2) = p;
            }
            m.cost_at(s, a) = stage_cost(s, a, n);
        }
    }
    for (int s2 = 0; s2 < m.n_states; ++s2) {
        for (int o = 0; o < m.n_observations; ++o) {
            double p = 1.0;
            for (int l = 0; l < n; ++l) {
                const BetaBinomial& bb =
                    component_state(s2, l) ? cfg.betabin_compromised : cfg.betabin_safe;
                int k = component_alerts(o, l, base);
                p *= k <= bb.trials ? betabin_pmf(bb.trials, bb.alpha, bb.beta, k) : 0.0;
            }
            m.obs(s2, o) = p;
        }
    }
    validate_model(m);
    return m;
}

/// Draws (s', o, c(s,a)) from the model. Reproducible given the generator.
inline std::tuple<int, int, double> sample_step(const PomdpModel& m, int s, int a, Rng& rng) {
    if (s < 0 || s >= m.n_states) throw std::invalid_argument("sample_step: bad state");
    check_action(m, a);
    std::span<const double> row(&m.transition[(static_cast<std::size_t>(a) * m.n_states + s) * m.n_states],
                                static_cast<std::size_t>(m.n_states));
    int s2 = sample_categorical(row, 1.0, rng);
    std::span<const double> zrow(&m.observation[static_cast<std::size_t>(s2) * m.n_observations],
                                 static_cast<std::size_t>(m.n_observations));
    int o = sample_categorical(zrow, 1.0, rng);
    return {s2, o, m.cost_at(s, a)};
}

inline void to_json(nlohmann::json& j, const BetaBinomial& bb) {
    j = nlohmann::json{{"trials", bb.trials}, {"alpha", bb.alpha}, {"beta", bb.beta}};
}
inline void from_json(const nlohmann::json& j, BetaBinomial& bb) {
    bb.trials = j.at("trials").get<int>();
    bb.alpha = j.at("alpha").get<double>();
    bb.beta = j.at("beta").get<double>();
}

inline void to_json(nlohmann::json& j, const NetSysConfig& cfg) {
    j = nlohmann::json{{"n_components", cfg.n_components}, {"adjacency", cfg.adjacency},
                       {"p_attack", cfg.p_attack},         {"max_alerts", cfg.max_alerts},
                       {"betabin_compromised", cfg.betabin_compromised},
                       {"betabin_safe", cfg.betabin_safe}};
}
inline void from_json(const nlohmann::json& j, NetSysConfig& cfg) {
    cfg.n_components = j.at("n_components").get<int>();
    cfg.adjacency = j.at("adjacency").get<std::vector<std::vector<int>>>();
    cfg.p_attack = j.at("p_attack").get<double>();
    cfg.max_alerts = j.at("max_alerts").get<int>();
    cfg.betabin_compromised = j.at("betabin_compromised").get<BetaBinomial>();
    cfg.betabin_safe = j.at("betabin_safe").get<BetaBinomial>();
    if (j.contains("discount")) cfg.discount = j.at("discount").get<double>();
    validate_config(cfg);
}

}  // namespace mobal::netsys
