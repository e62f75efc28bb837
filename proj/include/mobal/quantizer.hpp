#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "mobal/pomdp.hpp"
#include "mobal/rng.hpp"

namespace mobal {

/// Exact count of lattice beliefs: C(r+n-1, n-1). Throws capacity_error on
/// 64-bit overflow.
inline std::uint64_t lattice_count(int n, int r) {
    if (n < 1 || r < 0) throw std::invalid_argument("lattice_count: need n>=1, r>=0");
    std::uint64_t result = 1;
    for (int i = 1; i <= n - 1; ++i) {
        // multiply by (r + i) / i, keeping exact integers
        std::uint64_t factor = static_cast<std::uint64_t>(r) + i;
        if (result > std::numeric_limits<std::uint64_t>::max() / factor)
            throw capacity_error("lattice_count: overflow");
        result = result * factor / i;
    }
    return result;
}

/// The simplex lattice at resolution r: all beliefs with coordinates beta_s/r,
/// sum beta_s = r, ordered lexicographically by the composition
/// (beta_1,...,beta_n). Index order is the tie-breaking order of quantize.
struct RepresentativeBeliefSet {
    int resolution = 1;
    int n_states = 0;
    std::vector<Belief> points;
};

inline RepresentativeBeliefSet enumerate_lattice(int n, int r,
                                                 std::uint64_t max_points = 2'000'000) {
    if (n < 1 || r < 1) throw std::invalid_argument("enumerate_lattice: need n>=1, r>=1");
    std::uint64_t count = lattice_count(n, r);
    if (count > max_points)
        throw capacity_error("enumerate_lattice: " + std::to_string(count) +
                             " points exceed the limit");
    RepresentativeBeliefSet rep;
    rep.resolution = r;
    rep.n_states = n;
    rep.points.reserve(count);
    std::vector<int> beta(n, 0);
    // recursive descent in lexicographic order
    auto emit = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == n - 1) {
            beta[pos] = remaining;
            Belief b(n);
            for (int s = 0; s < n; ++s) b[s] = static_cast<double>(beta[s]) / r;
            rep.points.push_back(std::move(b));
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            beta[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    emit(emit, 0, r);
    return rep;
}

/// Nearest representative belief in the sup norm; ties resolved to the
/// smallest lattice index (lexicographically smallest composition).
inline int quantize(const RepresentativeBeliefSet& rep, const Belief& b) {
    if (static_cast<int>(b.size()) != rep.n_states)
        throw std::invalid_argument("quantize: dimension mismatch");
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
        double d = 0.0;
        for (int s = 0; s < rep.n_states; ++s)
            d = std::max(d, std::abs(rep.points[i][s] - b[s]));
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

enum class KernelMode { exact, monte_carlo };

/// Finite MDP over the representative beliefs: successor beliefs of the
/// belief MDP pushed through quantize, costs from belief_cost.
struct QuantizedMdp {
    RepresentativeBeliefSet rep_set;
    std::vector<double> transitions;  // n_actions * n_rep * n_rep
    std::vector<double> costs;        // n_rep * n_actions
    int n_actions = 0;
    double discount = 0.0;

    int n_rep() const { return static_cast<int>(rep_set.points.size()); }
    double trans(int a, int i, int j) const {
        return transitions[(static_cast<std::size_t>(a) * n_rep() + i) * n_rep() + j];
    }
    double& trans(int a, int i, int j) {
        return transitions[(static_cast<std::size_t>(a) * n_rep() + i) * n_rep() + j];
    }
    double cost_at(int i, int a) const {
        return costs[static_cast<std::size_t>(i) * n_actions + a];
    }
    double& cost_at(int i, int a) {
        return costs[static_cast<std::size_t>(i) * n_actions + a];
    }
};

/// Exact mode enumerates belief_transition_support per (rep, action);
/// monte_carlo mode estimates the same kernel by sampling `mc_samples`
/// observations from the one-step observation marginal.
inline QuantizedMdp build_quantized_mdp(const PomdpModel& model, const RepresentativeBeliefSet& rep,
                                        KernelMode mode = KernelMode::exact, int mc_samples = 100000,
                                        std::uint64_t seed = 0,
                                        std::uint64_t max_entries = 200'000'000) {
    if (model.n_states != rep.n_states)
        throw std::invalid_argument("build_quantized_mdp: state dimension mismatch");
    std::uint64_t n_rep = rep.points.size();
    if (n_rep * n_rep * model.n_actions > max_entries)
        throw capacity_error("build_quantized_mdp: kernel too large");
    QuantizedMdp q;
    q.rep_set = rep;
    q.n_actions = model.n_actions;
    q.discount = model.discount;
    q.transitions.assign(n_rep * n_rep * model.n_actions, 0.0);
    q.costs.assign(n_rep * model.n_actions, 0.0);
    Rng rng = make_rng(seed, 0x71a2);
    for (int i = 0; i < static_cast<int>(n_rep); ++i) {
        const Belief& bt = rep.points[i];
        for (int a = 0; a < model.n_actions; ++a) {
            q.cost_at(i, a) = belief_cost(model, bt, a);
            if (mode == KernelMode::exact) {
                for (const auto& [successor, probability] : belief_transition_support(model, bt, a))
                    q.trans(a, i, quantize(rep, successor)) += probability;
            } else {
                if (mc_samples <= 0)
                    throw std::invalid_argument("build_quantized_mdp: mc_samples must be positive");
                std::vector<double> marginal(model.n_observations);
                double total = 0.0;
                for (int o = 0; o < model.n_observations; ++o) {
                    marginal[o] = observation_likelihood(model, bt, a, o);
                    total += marginal[o];
                }
                // map each distinct sampled observation once, weight by count
                std::vector<int> hits(model.n_observations, 0);
                for (int k = 0; k < mc_samples; ++k)
                    ++hits[sample_categorical(marginal, total, rng)];
                for (int o = 0; o < model.n_observations; ++o) {
                    if (hits[o] == 0) continue;
                    int j = quantize(rep, belief_update(model, bt, a, o));
                    q.trans(a, i, j) += static_cast<double>(hits[o]) / mc_samples;
                }
            }
        }
    }
    return q;
}

/// Value-iteration output over the representative beliefs.
struct SolvedPlan {
    std::vector<double> values;
    std::vector<int> policy;
    int sweeps = 0;
};

/// Synchronous value iteration from V=0 until the sup-norm change is at most
/// `threshold` (default 0.1). Policy ties resolve to the lowest action index.
inline SolvedPlan value_iteration(const QuantizedMdp& q, double threshold = 0.1) {
    if (!(threshold > 0.0)) throw std::invalid_argument("value_iteration: threshold must be positive");
    int n = q.n_rep();
    SolvedPlan plan;
    plan.values.assign(n, 0.0);
    plan.policy.assign(n, 0);
    std::vector<double> next(n, 0.0);
    while (true) {
        ++plan.sweeps;
        double change = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < q.n_actions; ++a) {
                double v = 0.0;
                const double* row = &q.transitions[(static_cast<std::size_t>(a) * n + i) * n];
                for (int j = 0; j < n; ++j) v += row[j] * plan.values[j];
                v = q.cost_at(i, a) + q.discount * v;
                if (v < best) {
                    best = v;
                    best_a = a;
                }
            }
            next[i] = best;
            plan.policy[i] = best_a;
            change = std::max(change, std::abs(next[i] - plan.values[i]));
        }
        plan.values.swap(next);
        if (change <= threshold) break;
    }
    return plan;
}

/// J~(b) = V*(Phi(b)).
inline double approx_cost(const SolvedPlan& plan, const RepresentativeBeliefSet& rep,
                          const Belief& b) {
    return plan.values[quantize(rep, b)];
}

/// pi~(b) = mu*(Phi(b)).
inline int approx_policy(const SolvedPlan& plan, const RepresentativeBeliefSet& rep,
                         const Belief& b) {
    return plan.policy[quantize(rep, b)];
}

// --- JSON mirrors for caching across loop steps ---

inline void to_json(nlohmann::json& j, const RepresentativeBeliefSet& rep) {
    j = nlohmann::json{{"resolution", rep.resolution},
                       {"n_states", rep.n_states},
                       {"points", rep.points}};
}
inline void from_json(const nlohmann::json& j, RepresentativeBeliefSet& rep) {
    rep.resolution = j.at("resolution").get<int>();
    rep.n_states = j.at("n_states").get<int>();
    rep.points = j.at("points").get<std::vector<Belief>>();
}

inline void to_json(nlohmann::json& j, const QuantizedMdp& q) {
    j = nlohmann::json{{"rep_set", q.rep_set},
                       {"transitions", q.transitions},
                       {"costs", q.costs},
                       {"n_actions", q.n_actions},
                       {"discount", q.discount}};
}
inline void from_json(const nlohmann::json& j, QuantizedMdp& q) {
    q.rep_set = j.at("rep_set").get<RepresentativeBeliefSet>();
    q.transitions = j.at("transitions").get<std::vector<double>>();
    q.costs = j.at("costs").get<std::vector<double>>();
    q.n_actions = j.at("n_actions").get<int>();
    q.discount = j.at("discount").get<double>();
}

inline void to_json(nlohmann::json& j, const SolvedPlan& plan) {
    j = nlohmann::json{{"values", plan.values}, {"policy", plan.policy}, {"sweeps", plan.sweeps}};
}
inline void from_json(const nlohmann::json& j, SolvedPlan& plan) {
    plan.values = j.at("values").get<std::vector<double>>();
    plan.policy = j.at("policy").get<std::vector<int>>();
    plan.sweeps = j.at("sweeps").get<int>();
}

}  // namespace mobal
