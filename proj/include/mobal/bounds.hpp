#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "mobal/pomdp.hpp"
#include "mobal/quantizer.hpp"
#include "mobal/rng.hpp"

namespace mobal {

/// Assembled error-bound components for one (true model, conjecture) pair.
struct BoundReport {
    double alpha = 0.0;         // total-variation gap of the belief kernels, in [0,2]
    double c_max = 0.0;         // worst belief cost
    double epsilon = 0.0;       // worst within-cell variation of the reference cost
    double misspec_bound = 0.0; // gamma alpha c_max / (1-gamma)^2
    double approx_bound = 0.0;  // epsilon / (1-gamma)
    double total_bound = 0.0;   // sum of the two
    long probe_count = 0;
};

/// max over beliefs and actions of the belief cost. The belief cost is
/// linear in b, so the supremum sits at a simplex vertex: max_{s,a} c(s,a).
inline double compute_c_max(const PomdpModel& m) {
    double best = 0.0;
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a) best = std::max(best, m.cost_at(s, a));
    return best;
}

namespace detail {

/// Key identifying a successor belief up to 1e-12 per coordinate.
inline std::vector<long long> belief_key(const Belief& b) {
    std::vector<long long> key(b.size());
    for (std::size_t s = 0; s < b.size(); ++s) key[s] = std::llround(b[s] * 1e12);
    return key;
}

}  // namespace detail

/// Estimated worst total-variation distance between the two models'
/// belief-transition kernels over the probe beliefs: per (probe, action),
/// each model's successor support is accumulated into one map keyed by
/// belief identity (quantized to 1e-12) and the absolute differences are
/// summed over the union. The supremum over the full simplex is not
/// computable; the result is a lower estimate that grows with the probe set.
inline double compute_alpha(const PomdpModel& model_true, const PomdpModel& model_conj,
                            const std::vector<Belief>& probes) {
    if (model_true.n_states != model_conj.n_states || model_true.n_actions != model_conj.n_actions ||
        model_true.n_observations != model_conj.n_observations)
        throw std::invalid_argument("compute_alpha: model dimensions differ");
    if (probes.empty()) throw std::invalid_argument("compute_alpha: no probe beliefs");
    double worst = 0.0;
    for (const Belief& b : probes) {
        for (int a = 0; a < model_true.n_actions; ++a) {
            std::map<std::vector<long long>, std::pair<double, double>> merged;
            for (const auto& [succ, p] : belief_transition_support(model_true, b, a))
                merged[detail::belief_key(succ)].first += p;
            for (const auto& [succ, p] : belief_transition_support(model_conj, b, a))
                merged[detail::belief_key(succ)].second += p;
            double tv = 0.0;
            for (const auto& [key, pq] : merged) tv += std::abs(pq.first - pq.second);
            worst = std::max(worst, tv);
        }
    }
    return std::clamp(worst, 0.0, 2.0);
}

/// High-resolution quantized solution standing in for the exact optimal cost
/// function of the (conjectured) belief MDP.
struct ReferencePlan {
    RepresentativeBeliefSet rep;
    SolvedPlan plan;

    double cost_at(const Belief& b) const { return approx_cost(plan, rep, b); }
};

constexpr double kReferenceViThreshold = 1e-8;

/// Solves the model at resolution r_ref (default 200) with a tight stopping
/// threshold. Guarded to small models.
inline ReferencePlan reference_cost_function(const PomdpModel& model, int r_ref = 200,
                                             double vi_threshold = kReferenceViThreshold) {
    if (model.n_states > 16)
        throw capacity_error("reference_cost_function: model too large for a lattice reference");
    ReferencePlan ref;
    ref.rep = enumerate_lattice(model.n_states, r_ref);
    QuantizedMdp q = build_quantized_mdp(model, ref.rep);
    ref.plan = value_iteration(q, vi_threshold);
    return ref;
}

/// Estimate of the worst within-cell variation of the reference cost
/// function over the cells induced by `rep`: reference lattice points are
/// attributed to cells through quantize, plus `samples_per_cell` uniform
/// Dirichlet draws per cell to probe off-lattice beliefs.
inline double compute_epsilon(const ReferencePlan& reference, const RepresentativeBeliefSet& rep,
                              int samples_per_cell = 64, std::uint64_t seed = 0) {
    if (reference.rep.resolution < rep.resolution)
        throw std::invalid_argument("compute_epsilon: reference must be finer than rep");
    int n_cells = static_cast<int>(rep.points.size());
    std::vector<double> cell_min(n_cells, std::numeric_limits<double>::infinity());
    std::vector<double> cell_max(n_cells, -std::numeric_limits<double>::infinity());
    auto visit = [&](const Belief& b) {
        int cell = quantize(rep, b);
        double v = reference.cost_at(b);
        cell_min[cell] = std::min(cell_min[cell], v);
        cell_max[cell] = std::max(cell_max[cell], v);
    };
    for (const Belief& b : reference.rep.points) visit(b);
    Rng rng = make_rng(seed, 0xe45);
    int n = rep.n_states;
    std::vector<double> draws(n);
    for (long k = 0; k < static_cast<long>(samples_per_cell) * n_cells; ++k) {
        // uniform over the simplex via normalized exponentials
        double total = 0.0;
        for (int s = 0; s < n; ++s) {
            draws[s] = -std::log(1.0 - uniform01(rng));
            total += draws[s];
        }
        Belief b(n);
        for (int s = 0; s < n; ++s) b[s] = draws[s] / total;
        visit(b);
    }
    double eps = 0.0;
    for (int c = 0; c < n_cells; ++c)
        if (cell_max[c] > cell_min[c]) eps = std::max(eps, cell_max[c] - cell_min[c]);
    return eps;
}

/// gamma alpha c_max / (1-gamma)^2.
inline double misspecification_bound(double alpha, double c_max, double gamma) {
    if (alpha < 0.0 || alpha > 2.0) throw std::invalid_argument("misspecification_bound: alpha outside [0,2]");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("misspecification_bound: bad gamma");
    return gamma * alpha * c_max / ((1.0 - gamma) * (1.0 - gamma));
}

/// epsilon / (1-gamma).
inline double approximation_bound(double epsilon, double gamma) {
    if (epsilon < 0.0) throw std::invalid_argument("approximation_bound: negative epsilon");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("approximation_bound: bad gamma");
    return epsilon / (1.0 - gamma);
}

/// Assembles the full report; the total is the sum of the two bounds.
inline BoundReport suboptimality_bound(double alpha, double c_max, double epsilon, double gamma,
                                       long probe_count = 0) {
    BoundReport report;
    report.alpha = alpha;
    report.c_max = c_max;
    report.epsilon = epsilon;
    report.misspec_bound = misspecification_bound(alpha, c_max, gamma);
    report.approx_bound = approximation_bound(epsilon, gamma);
    report.total_bound = report.approx_bound + report.misspec_bound;
    report.probe_count = probe_count;
    return report;
}

}  // namespace mobal
