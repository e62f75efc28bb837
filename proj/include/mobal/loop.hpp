#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mobal/conjecture.hpp"
#include "mobal/netsys.hpp"
#include "mobal/particle_filter.hpp"
#include "mobal/pomdp.hpp"
#include "mobal/quantizer.hpp"
#include "mobal/rng.hpp"

namespace mobal {

enum class FilterMode { exact, particle };

/// Model the belief estimator propagates with: the posterior-mixture
/// predictive (default; keeps tracking even when the posterior concentrates
/// on a conjecture whose filter would be blind at a belief vertex) or the
/// currently sampled conjecture.
enum class FilterSource { mixture, sampled };

enum class ReplanPolicy { per_step, on_conjecture_change };

struct LoopConfig {
    ConjectureSpace conjecture_space;
    Posterior prior;                  // defaults to uniform when empty
    int resolution = 5;               // quantization resolution r
    double vi_threshold = 0.1;
    int particle_count = 50;
    FilterMode filter_mode = FilterMode::exact;
    FilterSource filter_source = FilterSource::mixture;
    ReplanPolicy replan_policy = ReplanPolicy::per_step;
    int horizon = 100;
    std::uint64_t seed = 0;
    Belief initial_belief;            // defaults to point mass on state 0
};

inline void validate_loop_config(const LoopConfig& cfg) {
    validate_space(cfg.conjecture_space);
    if (cfg.resolution < 1) throw std::invalid_argument("LoopConfig: resolution must be >= 1");
    if (cfg.horizon < 1) throw std::invalid_argument("LoopConfig: horizon must be >= 1");
    if (cfg.particle_count < 1) throw std::invalid_argument("LoopConfig: particle_count must be >= 1");
    if (!cfg.prior.empty()) validate_posterior(cfg.prior, cfg.conjecture_space.size());
    if (!cfg.initial_belief.empty()) validate_belief(cfg.initial_belief);
}

/// Exact filter step under the posterior-mixture predictive:
/// b'(s') proportional to sum_i rho(i) [sum_s b(s) p_i(s'|s,a)] z_i(o|s').
inline Belief mixture_belief_update(const ConjectureSpace& space, const Posterior& rho,
                                    const Belief& b, int a, int o) {
    int n = space.models.front().n_states;
    Belief next(n, 0.0);
    double norm = 0.0;
    for (int i = 0; i < space.size(); ++i) {
        if (rho[i] <= 0.0) continue;
        const PomdpModel& m = space.models[i];
        for (int s2 = 0; s2 < n; ++s2) {
            double pred = 0.0;
            for (int s = 0; s < n; ++s) pred += b[s] * m.trans(a, s, s2);
            next[s2] += rho[i] * pred * m.obs(s2, o);
        }
    }
    for (double p : next) norm += p;
    if (norm <= 0.0)
        throw impossible_observation("mixture_belief_update: zero likelihood");
    for (double& p : next) p /= norm;
    return next;
}

inline Belief mixture_belief_predict(const ConjectureSpace& space, const Posterior& rho,
                                     const Belief& b, int a) {
    int n = space.models.front().n_states;
    Belief next(n, 0.0);
    for (int i = 0; i < space.size(); ++i) {
        if (rho[i] <= 0.0) continue;
        for (int s2 = 0; s2 < n; ++s2) {
            double pred = 0.0;
            for (int s = 0; s < n; ++s) pred += b[s] * space.models[i].trans(a, s, s2);
            next[s2] += rho[i] * pred;
        }
    }
    return next;
}

/// Per-step record of an episode. `observation` is the observation received
/// at the start of the step (-1 at t=0 where none exists yet).
struct EpisodeRecord {
    int t = 0;
    int state = 0;
    int observation = -1;
    int action = 0;
    Belief belief;
    int conjecture_index = 0;
    Posterior posterior;
    double stage_cost = 0.0;
    double discounted_return = 0.0;  // running sum through this step
};

struct EpisodeLog {
    std::vector<EpisodeRecord> records;
    double discounted_return = 0.0;
    long impossible_observation_events = 0;
    long degenerate_evidence_events = 0;
    long zero_weight_particle_events = 0;
    long plan_solves = 0;
};

/// Online controller: per observation, (1) belief update under the configured
/// filter, (2) posterior update conditioned on the refreshed belief, (3)
/// conjecture sampling and planning on its quantized model. Never sees the
/// environment state; only observations cross the boundary.
class MobalLoop {
  public:
    explicit MobalLoop(LoopConfig cfg) : cfg_(std::move(cfg)) {
        validate_loop_config(cfg_);
        const PomdpModel& first = cfg_.conjecture_space.models.front();
        if (cfg_.prior.empty()) cfg_.prior = uniform_posterior(cfg_.conjecture_space.size());
        posterior_ = cfg_.prior;
        belief_ = cfg_.initial_belief.empty() ? point_mass(first.n_states, 0) : cfg_.initial_belief;
        rep_ = enumerate_lattice(first.n_states, cfg_.resolution);
        rng_ = make_rng(cfg_.seed, 2);
        if (cfg_.filter_mode == FilterMode::particle)
            particles_ = ParticleSet::from_belief(belief_, cfg_.particle_count, rng_);
        conjecture_ = sample_conjecture(posterior_, rng_);
        prev_action_ = bootstrap_action();
    }

    /// Action taken before the first observation arrives.
    int initial_action() const { return prev_action_; }

    /// Consumes the next observation, returns the response action.
    int step(int obs) {
        // stage 1: belief
        update_belief(obs);
        // stage 2: posterior, conditioned on the refreshed belief
        try {
            posterior_ = posterior_update(cfg_.conjecture_space, posterior_, belief_, prev_action_, obs);
        } catch (const degenerate_evidence&) {
            ++degenerate_evidence_events_;  // keep the previous posterior
        }
        // stage 3: sample a conjecture, plan, act. The plan cache makes
        // per-step and on-conjecture-change replanning observably identical:
        // a repeated conjecture is always a cache hit.
        conjecture_ = sample_conjecture(posterior_, rng_);
        const CachedPlan& plan = plan_for(conjecture_);
        prev_action_ = approx_policy(plan.plan, rep_, belief_);
        return prev_action_;
    }

    const Belief& belief() const { return belief_; }
    const Posterior& posterior() const { return posterior_; }
    int conjecture_index() const { return conjecture_; }
    long plan_solves() const { return plan_solves_; }
    long impossible_observation_events() const { return impossible_observation_events_; }
    long degenerate_evidence_events() const { return degenerate_evidence_events_; }
    long zero_weight_particle_events() const { return zero_weight_particle_events_; }
    const RepresentativeBeliefSet& representative_set() const { return rep_; }

    /// Solved plan for a conjecture (cached; at most one solve per conjecture
    /// index for a fixed resolution).
    const SolvedPlan& plan(int conjecture_index) { return plan_for(conjecture_index).plan; }

  private:
    struct CachedPlan {
        SolvedPlan plan;
    };

    static Belief point_mass(int n, int s) {
        Belief b(n, 0.0);
        b[s] = 1.0;
        return b;
    }

    const CachedPlan& plan_for(int idx) {
        auto it = cache_.find(idx);
        if (it == cache_.end()) {
            const PomdpModel& m = cfg_.conjecture_space.models[idx];
            // enumerate the kernel exactly while the observation space is
            // small; identify it by simulation beyond that
            KernelMode mode = m.n_observations <= 4096 ? KernelMode::exact : KernelMode::monte_carlo;
            QuantizedMdp q = build_quantized_mdp(m, rep_, mode, /*mc_samples=*/100000,
                                                 /*seed=*/cfg_.seed * 31 + idx);
            it = cache_.emplace(idx, CachedPlan{value_iteration(q, cfg_.vi_threshold)}).first;
            ++plan_solves_;
        }
        return it->second;
    }

    /// One-step Bellman argmin at the initial belief under the prior-sampled
    /// conjecture; bootstraps a0 before any observation exists.
    int bootstrap_action() {
        const PomdpModel& m = cfg_.conjecture_space.models[conjecture_];
        const CachedPlan& plan = plan_for(conjecture_);
        int best_a = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < m.n_actions; ++a) {
            double q = belief_cost(m, belief_, a);
            for (const auto& [succ, p] : belief_transition_support(m, belief_, a))
                q += m.discount * p * approx_cost(plan.plan, rep_, succ);
            if (q < best) {
                best = q;
                best_a = a;
            }
        }
        return best_a;
    }

    void update_belief(int obs) {
        if (cfg_.filter_mode == FilterMode::exact) {
            try {
                belief_ = cfg_.filter_source == FilterSource::mixture
                              ? mixture_belief_update(cfg_.conjecture_space, posterior_, belief_,
                                                      prev_action_, obs)
                              : belief_update(cfg_.conjecture_space.models[conjecture_], belief_,
                                              prev_action_, obs);
            } catch (const impossible_observation&) {
                ++impossible_observation_events_;
                belief_ = cfg_.filter_source == FilterSource::mixture
                              ? mixture_belief_predict(cfg_.conjecture_space, posterior_, belief_,
                                                       prev_action_)
                              : belief_predict(cfg_.conjecture_space.models[conjecture_], belief_,
                                               prev_action_);
            }
        } else {
            if (cfg_.filter_source == FilterSource::mixture) {
                // mixture propagation: draw a conjecture per particle, weight
                // each particle under the model that propagated it
                ParticleSet propagated = particles_;
                std::vector<double> weights(propagated.particles.size());
                double total = 0.0;
                for (std::size_t j = 0; j < propagated.particles.size(); ++j) {
                    int i = sample_conjecture(posterior_, rng_);
                    const PomdpModel& m = cfg_.conjecture_space.models[i];
                    int s = propagated.particles[j];
                    std::span<const double> row(
                        &m.transition[(static_cast<std::size_t>(prev_action_) * m.n_states + s) *
                                      m.n_states],
                        static_cast<std::size_t>(m.n_states));
                    propagated.particles[j] = sample_categorical(row, 1.0, rng_);
                    weights[j] = m.obs(propagated.particles[j], obs);
                    total += weights[j];
                }
                if (total <= 0.0) {
                    ++zero_weight_particle_events_;
                    particles_ = std::move(propagated);
                } else {
                    std::vector<int> resampled(propagated.particles.size());
                    double step_w = total / resampled.size();
                    double u = uniform01(rng_) * step_w;
                    double cumulative = weights[0];
                    std::size_t i = 0;
                    for (std::size_t j = 0; j < resampled.size(); ++j) {
                        double target = u + j * step_w;
                        while (target > cumulative && i + 1 < resampled.size()) cumulative += weights[++i];
                        resampled[j] = propagated.particles[i];
                    }
                    particles_ = ParticleSet{std::move(resampled)};
                }
            } else {
                particles_ = particle_filter_step(cfg_.conjecture_space.models[conjecture_], particles_,
                                                  prev_action_, obs, rng_, &zero_weight_particle_events_);
            }
            belief_ = particle_belief(particles_, cfg_.conjecture_space.models.front().n_states);
        }
    }

    LoopConfig cfg_;
    Belief belief_;
    Posterior posterior_;
    ParticleSet particles_;
    RepresentativeBeliefSet rep_;
    int conjecture_ = 0;
    int prev_action_ = 0;
    Rng rng_;
    std::map<int, CachedPlan> cache_;
    long plan_solves_ = 0;
    long impossible_observation_events_ = 0;
    long degenerate_evidence_events_ = 0;
    long zero_weight_particle_events_ = 0;
};

/// Simulates the true system while the loop selects actions from observations
/// alone. Row t carries the state acted in, the observation received at t
/// (-1 at t=0), the action taken, and the loop state (belief, conjecture,
/// posterior) the action was computed from.
inline EpisodeLog run_episode(const PomdpModel& env_model, const LoopConfig& cfg) {
    if (env_model.n_states != cfg.conjecture_space.models.front().n_states ||
        env_model.n_actions != cfg.conjecture_space.models.front().n_actions ||
        env_model.n_observations != cfg.conjecture_space.models.front().n_observations)
        throw std::invalid_argument("run_episode: environment and conjectures disagree on dimensions");
    MobalLoop loop(cfg);
    Rng env_rng = make_rng(cfg.seed, 1);
    EpisodeLog log;
    log.records.reserve(cfg.horizon);
    int state = 0;  // all components safe
    int action = loop.initial_action();
    int obs = -1;
    double ret = 0.0;
    double gamma_pow = 1.0;
    for (int t = 0; t < cfg.horizon; ++t) {
        double cost = env_model.cost_at(state, action);
        ret += gamma_pow * cost;
        log.records.push_back({t, state, obs, action, loop.belief(), loop.conjecture_index(),
                               loop.posterior(), cost, ret});
        if (t + 1 >= cfg.horizon) break;
        auto [next_state, next_obs, step_cost] = netsys::sample_step(env_model, state, action, env_rng);
        state = next_state;
        obs = next_obs;
        action = loop.step(obs);
        gamma_pow *= env_model.discount;
    }
    log.discounted_return = ret;
    log.impossible_observation_events = loop.impossible_observation_events();
    log.degenerate_evidence_events = loop.degenerate_evidence_events();
    log.zero_weight_particle_events = loop.zero_weight_particle_events();
    log.plan_solves = loop.plan_solves();
    return log;
}

/// Episode under a scripted strategy that never looks at the state (baseline
/// harness: uniform-random, always-block, ...). Beliefs/posteriors left empty.
inline EpisodeLog run_scripted_episode(const PomdpModel& env_model, int horizon, std::uint64_t seed,
                                       const std::function<int(int /*t*/, Rng&)>& strategy) {
    Rng env_rng = make_rng(seed, 1);
    Rng strategy_rng = make_rng(seed, 2);
    EpisodeLog log;
    log.records.reserve(horizon);
    int state = 0;
    int obs = -1;
    int action = strategy(0, strategy_rng);
    double ret = 0.0;
    double gamma_pow = 1.0;
    for (int t = 0; t < horizon; ++t) {
        double cost = env_model.cost_at(state, action);
        ret += gamma_pow * cost;
        log.records.push_back({t, state, obs, action, {}, -1, {}, cost, ret});
        if (t + 1 >= horizon) break;
        auto [next_state, next_obs, step_cost] = netsys::sample_step(env_model, state, action, env_rng);
        state = next_state;
        obs = next_obs;
        action = strategy(t + 1, strategy_rng);
        gamma_pow *= env_model.discount;
    }
    log.discounted_return = ret;
    return log;
}

inline void to_json(nlohmann::json& j, const EpisodeRecord& r) {
    j = nlohmann::json{{"t", r.t},
                       {"s", r.state},
                       {"o", r.observation},
                       {"a", r.action},
                       {"belief", r.belief},
                       {"conjecture_idx", r.conjecture_index},
                       {"posterior", r.posterior},
                       {"cost", r.stage_cost},
                       {"discounted_return", r.discounted_return}};
}
inline void from_json(const nlohmann::json& j, EpisodeRecord& r) {
    r.t = j.at("t").get<int>();
    r.state = j.at("s").get<int>();
    r.observation = j.at("o").get<int>();
    r.action = j.at("a").get<int>();
    r.belief = j.at("belief").get<Belief>();
    r.conjecture_index = j.at("conjecture_idx").get<int>();
    r.posterior = j.at("posterior").get<Posterior>();
    r.stage_cost = j.at("cost").get<double>();
    r.discounted_return = j.at("discounted_return").get<double>();
}

inline void to_json(nlohmann::json& j, const EpisodeLog& log) {
    j = nlohmann::json{{"records", log.records},
                       {"discounted_return", log.discounted_return},
                       {"impossible_observation_events", log.impossible_observation_events},
                       {"degenerate_evidence_events", log.degenerate_evidence_events},
                       {"zero_weight_particle_events", log.zero_weight_particle_events},
                       {"plan_solves", log.plan_solves}};
}
inline void from_json(const nlohmann::json& j, EpisodeLog& log) {
    log.records = j.at("records").get<std::vector<EpisodeRecord>>();
    log.discounted_return = j.at("discounted_return").get<double>();
    log.impossible_observation_events = j.at("impossible_observation_events").get<long>();
    log.degenerate_evidence_events = j.at("degenerate_evidence_events").get<long>();
    log.zero_weight_particle_events = j.at("zero_weight_particle_events").get<long>();
    log.plan_solves = j.at("plan_solves").get<long>();
}

}  // namespace mobal
