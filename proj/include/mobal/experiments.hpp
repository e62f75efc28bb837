#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mobal/bounds.hpp"
#include "mobal/conjecture.hpp"
#include "mobal/csv.hpp"
#include "mobal/loop.hpp"
#include "mobal/netsys.hpp"
#include "mobal/particle_filter.hpp"
#include "mobal/pomdp.hpp"
#include "mobal/quantizer.hpp"

namespace mobal::experiments {

/// Worker count: MOBAL_THREADS when set, otherwise hardware concurrency,
/// never more than the number of jobs.
inline unsigned thread_budget(std::size_t jobs) {
    unsigned budget = std::thread::hardware_concurrency();
    if (budget == 0) budget = 1;
    if (const char* env = std::getenv("MOBAL_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) budget = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::min<std::size_t>(budget, std::max<std::size_t>(jobs, 1)));
}

/// Runs fn(0..count-1) across workers. Each job writes only its own output
/// slot, so aggregation order (and output bytes) do not depend on the budget.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    unsigned workers = thread_budget(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// The networked-system study configuration: true attack probability 0.2,
// conjectures {0, 0.5, 1}, uniform prior, resolution 5.
// ---------------------------------------------------------------------------

inline netsys::NetSysConfig default_env(int n_components = 1) {
    return netsys::NetSysConfig::path(n_components, 0.2);
}

inline ConjectureSpace make_space(const netsys::NetSysConfig& env,
                                  const std::vector<double>& conjectured_p) {
    ConjectureSpace space;
    for (double p : conjectured_p) {
        space.parameters.push_back({p});
        space.models.push_back(netsys::build_model(env, p));
    }
    validate_space(space);
    return space;
}

inline LoopConfig default_loop_config(const netsys::NetSysConfig& env,
                                      const std::vector<double>& conjectured_p = {0.0, 0.5, 1.0}) {
    LoopConfig cfg;
    cfg.conjecture_space = make_space(env, conjectured_p);
    cfg.prior = uniform_posterior(cfg.conjecture_space.size());
    return cfg;
}

// ---------------------------------------------------------------------------
// obs-dist: the per-component alert distributions.
// ---------------------------------------------------------------------------

struct ObsDistRow {
    int k;
    double p_safe;
    double p_compromised;
};

inline std::vector<ObsDistRow> obs_dist_rows(const netsys::NetSysConfig& env = default_env()) {
    std::vector<ObsDistRow> rows;
    for (int k = 0; k <= env.max_alerts; ++k)
        rows.push_back({k,
                        netsys::betabin_pmf(env.betabin_safe.trials, env.betabin_safe.alpha,
                                            env.betabin_safe.beta, k),
                        netsys::betabin_pmf(env.betabin_compromised.trials, env.betabin_compromised.alpha,
                                            env.betabin_compromised.beta, k)});
    return rows;
}

inline std::string obs_dist_csv(const std::vector<ObsDistRow>& rows) {
    CsvWriter csv("obs-dist-v1");
    csv.header({"k", "p_safe", "p_compromised"});
    for (const auto& r : rows)
        csv.row({std::to_string(r.k), csv_double(r.p_safe), csv_double(r.p_compromised)});
    return csv.str();
}

// ---------------------------------------------------------------------------
// lattice-count: |B~| per (n, r).
// ---------------------------------------------------------------------------

struct LatticeCountRow {
    int n;
    int r;
    std::uint64_t count;
};

inline std::vector<LatticeCountRow> lattice_count_rows(const std::vector<int>& n_grid,
                                                       const std::vector<int>& r_grid) {
    std::vector<LatticeCountRow> rows;
    for (int n : n_grid)
        for (int r : r_grid) rows.push_back({n, r, lattice_count(n, r)});
    return rows;
}

inline std::string lattice_count_csv(const std::vector<LatticeCountRow>& rows) {
    CsvWriter csv("lattice-count-v1");
    csv.header({"n", "r", "count"});
    for (const auto& r : rows)
        csv.row({std::to_string(r.n), std::to_string(r.r), std::to_string(r.count)});
    return csv.str();
}

// ---------------------------------------------------------------------------
// filter-eval: particle-filter accuracy against the exact filter, both under
// the true model, trajectories driven by the true model's lattice strategy.
// ---------------------------------------------------------------------------

struct FilterEvalRow {
    int n_components;
    int n_states;
    int m;
    double mean_error;
    double std_error;  // over per-seed means
};

struct FilterEvalProtocol {
    std::vector<int> component_grid = {1, 2, 3};
    std::vector<int> m_grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18};
    int episodes = 100;
    int steps = 100;
    std::vector<std::uint64_t> seeds;  // default 0..99
    int strategy_resolution = 5;
};

inline std::vector<FilterEvalRow> filter_eval(const FilterEvalProtocol& proto) {
    std::vector<std::uint64_t> seeds = proto.seeds;
    if (seeds.empty())
        for (std::uint64_t s = 0; s < 100; ++s) seeds.push_back(s);
    std::vector<FilterEvalRow> rows;
    for (int n_comp : proto.component_grid) {
        netsys::NetSysConfig env = default_env(n_comp);
        PomdpModel model = netsys::build_model(env);
        RepresentativeBeliefSet rep = enumerate_lattice(model.n_states, proto.strategy_resolution);
        SolvedPlan plan = value_iteration(build_quantized_mdp(model, rep));
        for (int m : proto.m_grid) {
            std::vector<double> seed_means(seeds.size(), 0.0);
            parallel_for(seeds.size(), [&](std::size_t si) {
                double total = 0.0;
                long count = 0;
                for (int ep = 0; ep < proto.episodes; ++ep) {
                    Rng env_rng = make_rng(seeds[si] * 1000003ull + ep, 1);
                    Rng pf_rng = make_rng(seeds[si] * 1000003ull + ep, 3);
                    int state = 0;
                    Belief exact(model.n_states, 0.0);
                    exact[0] = 1.0;
                    ParticleSet particles = ParticleSet::from_state(0, m);
                    int action = approx_policy(plan, rep, exact);
                    for (int t = 0; t < proto.steps; ++t) {
                        auto [s2, o, c] = netsys::sample_step(model, state, action, env_rng);
                        state = s2;
                        exact = belief_update(model, exact, action, o);
                        particles = particle_filter_step(model, particles, action, o, pf_rng);
                        total += filter_error(exact, particle_belief(particles, model.n_states));
                        ++count;
                        action = approx_policy(plan, rep, exact);
                    }
                }
                seed_means[si] = total / count;
            });
            double mean = 0.0;
            for (double v : seed_means) mean += v;
            mean /= seed_means.size();
            double var = 0.0;
            for (double v : seed_means) var += (v - mean) * (v - mean);
            double sd = seed_means.size() > 1 ? std::sqrt(var / (seed_means.size() - 1)) : 0.0;
            rows.push_back({n_comp, model.n_states, m, mean, sd});
        }
    }
    return rows;
}

inline std::string filter_eval_csv(const std::vector<FilterEvalRow>& rows) {
    CsvWriter csv("filter-eval-v1");
    csv.header({"n_components", "n_states", "m", "mean_error", "std_error"});
    for (const auto& r : rows)
        csv.row({std::to_string(r.n_components), std::to_string(r.n_states), std::to_string(r.m),
                 csv_double(r.mean_error), csv_double(r.std_error)});
    return csv.str();
}

// ---------------------------------------------------------------------------
// posterior-eval: Bayesian-learning diagnostic along the networked-system
// study. The trajectory follows the true model's lattice strategy with the
// exact filter under the true model (the same protocol as the filter study);
// the posterior over the conjectures is updated on the side and reported
// together with the per-prefix discrepancies.
// ---------------------------------------------------------------------------

struct DiagnosticStep {
    int t;
    int action_taken;  // action that produced this step's observation
    int observation;
    Belief belief;
    Posterior posterior;
};

inline std::vector<DiagnosticStep> run_posterior_diagnostic(const PomdpModel& true_model,
                                                            const ConjectureSpace& space,
                                                            int resolution, std::uint64_t seed,
                                                            int steps) {
    RepresentativeBeliefSet rep = enumerate_lattice(true_model.n_states, resolution);
    SolvedPlan plan = value_iteration(build_quantized_mdp(true_model, rep));
    Rng env_rng = make_rng(seed, 1);
    int state = 0;
    Belief belief(true_model.n_states, 0.0);
    belief[0] = 1.0;
    Posterior rho = uniform_posterior(space.size());
    int action = approx_policy(plan, rep, belief);
    std::vector<DiagnosticStep> out;
    out.reserve(steps);
    for (int t = 1; t <= steps; ++t) {
        auto [next_state, obs, cost] = netsys::sample_step(true_model, state, action, env_rng);
        state = next_state;
        int prev_action = action;
        belief = belief_update(true_model, belief, prev_action, obs);
        try {
            rho = posterior_update(space, rho, belief, prev_action, obs);
        } catch (const degenerate_evidence&) {
            // keep the previous posterior
        }
        out.push_back({t, prev_action, obs, belief, rho});
        action = approx_policy(plan, rep, belief);
    }
    return out;
}

struct PosteriorEvalRow {
    std::uint64_t seed;
    int t;
    Posterior posterior;
    std::vector<double> discrepancies;
};

struct PosteriorEvalResult {
    std::vector<double> conjectured_p;
    std::vector<PosteriorEvalRow> rows;
};

inline PosteriorEvalResult posterior_eval(int steps, const std::vector<std::uint64_t>& seeds,
                                          int resolution = 5) {
    netsys::NetSysConfig env = default_env(1);
    PomdpModel true_model = netsys::build_model(env);
    PosteriorEvalResult result;
    result.conjectured_p = {0.0, 0.5, 1.0};
    ConjectureSpace space = make_space(env, result.conjectured_p);
    std::vector<std::vector<PosteriorEvalRow>> per_seed(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t si) {
        auto trajectory = run_posterior_diagnostic(true_model, space, resolution, seeds[si], steps);
        EmpiricalHistory hist;
        std::vector<PosteriorEvalRow> rows;
        for (const DiagnosticStep& step : trajectory) {
            hist.beliefs.push_back(step.belief);
            hist.actions.push_back(step.action_taken);
            std::vector<double> kvals(space.size());
            for (int i = 0; i < space.size(); ++i) kvals[i] = discrepancy(space, i, true_model, hist);
            rows.push_back({seeds[si], step.t, step.posterior, std::move(kvals)});
        }
        per_seed[si] = std::move(rows);
    });
    for (auto& rows : per_seed)
        for (auto& row : rows) result.rows.push_back(std::move(row));
    return result;
}

inline std::string posterior_eval_csv(const PosteriorEvalResult& result) {
    CsvWriter csv("posterior-eval-v1");
    std::string params;
    for (std::size_t i = 0; i < result.conjectured_p.size(); ++i)
        params += (i ? ";" : "") + csv_double(result.conjectured_p[i]);
    csv.comment("conjectured_p=" + params);
    std::vector<std::string> header{"seed", "t"};
    for (std::size_t i = 0; i < result.conjectured_p.size(); ++i) header.push_back("rho" + std::to_string(i));
    for (std::size_t i = 0; i < result.conjectured_p.size(); ++i) header.push_back("k" + std::to_string(i));
    csv.header(header);
    for (const auto& row : result.rows) {
        std::vector<std::string> cells{std::to_string(row.seed), std::to_string(row.t)};
        for (double w : row.posterior) cells.push_back(csv_double(w));
        for (double k : row.discrepancies) cells.push_back(csv_double(k));
        csv.row(cells);
    }
    return csv.str();
}

// ---------------------------------------------------------------------------
// bound-eval: approximation bound vs measured approximation error per r,
// plus the misspecification side, on the single-component system with
// conjectured attack probability 0.5 against the true 0.2.
// ---------------------------------------------------------------------------

struct BoundEvalRow {
    int r;
    double epsilon;
    double approx_bound;
    double actual_error;
    double alpha;
    double misspec_bound;
    double total_bound;
};

struct BoundEvalResult {
    std::vector<BoundEvalRow> rows;
    double c_max = 0.0;
    double measured_misspec_gap = 0.0;  // sup-grid |J*_conj - J*_true| (references)
};

inline std::vector<Belief> belief_grid_n2(int points = 101) {
    std::vector<Belief> grid;
    grid.reserve(points);
    for (int i = 0; i < points; ++i) {
        double x = static_cast<double>(i) / (points - 1);
        grid.push_back({1.0 - x, x});
    }
    return grid;
}

inline BoundEvalResult bound_eval(const std::vector<int>& r_grid, double conjectured_p = 0.5,
                                  int r_ref = 200, int alpha_probe_resolution = 20,
                                  int eps_samples_per_cell = 64) {
    netsys::NetSysConfig env = default_env(1);
    PomdpModel true_model = netsys::build_model(env);
    PomdpModel conj_model = netsys::build_model(env, conjectured_p);
    ReferencePlan ref_conj = reference_cost_function(conj_model, r_ref);
    ReferencePlan ref_true = reference_cost_function(true_model, r_ref);
    std::vector<Belief> grid = belief_grid_n2();
    RepresentativeBeliefSet probe_rep = enumerate_lattice(2, alpha_probe_resolution);
    double alpha = compute_alpha(true_model, conj_model, probe_rep.points);
    double c_max = compute_c_max(conj_model);
    double gamma = conj_model.discount;

    BoundEvalResult result;
    result.c_max = c_max;
    for (const Belief& b : grid)
        result.measured_misspec_gap =
            std::max(result.measured_misspec_gap, std::abs(ref_conj.cost_at(b) - ref_true.cost_at(b)));

    result.rows.resize(r_grid.size());
    parallel_for(r_grid.size(), [&](std::size_t i) {
        int r = r_grid[i];
        RepresentativeBeliefSet rep = enumerate_lattice(2, r);
        SolvedPlan plan = value_iteration(build_quantized_mdp(conj_model, rep), kReferenceViThreshold);
        double actual = 0.0;
        for (const Belief& b : grid)
            actual = std::max(actual, std::abs(approx_cost(plan, rep, b) - ref_conj.cost_at(b)));
        double eps = compute_epsilon(ref_conj, rep, eps_samples_per_cell, /*seed=*/0);
        BoundReport report = suboptimality_bound(alpha, c_max, eps, gamma,
                                                 static_cast<long>(probe_rep.points.size()));
        result.rows[i] = {r,           eps,
                          report.approx_bound, actual,
                          report.alpha,        report.misspec_bound,
                          report.total_bound};
    });
    return result;
}

inline std::string bound_eval_csv(const BoundEvalResult& result) {
    CsvWriter csv("bound-eval-v1");
    csv.comment("c_max=" + csv_double(result.c_max) +
                " measured_misspec_gap=" + csv_double(result.measured_misspec_gap));
    csv.header({"r", "epsilon", "approx_bound", "actual_error", "alpha", "misspec_bound", "total_bound"});
    for (const auto& r : result.rows)
        csv.row({std::to_string(r.r), csv_double(r.epsilon), csv_double(r.approx_bound),
                 csv_double(r.actual_error), csv_double(r.alpha), csv_double(r.misspec_bound),
                 csv_double(r.total_bound)});
    return csv.str();
}

// ---------------------------------------------------------------------------
// costfun-eval: cost-function sweep over the compromise belief, comparing the
// true-model reference, the conjectured-model reference, and the quantized
// approximations at the requested resolutions.
// ---------------------------------------------------------------------------

struct CostFunEvalResult {
    std::vector<int> r_grid;
    std::vector<double> b1;                       // compromise-belief abscissae
    std::vector<double> j_true_ref;
    std::vector<double> j_conj_ref;
    std::vector<std::vector<double>> j_approx;    // [r index][grid index]
};

inline CostFunEvalResult costfun_eval(const std::vector<int>& r_grid, double conjectured_p = 0.5,
                                      int r_ref = 200, int grid_points = 101) {
    netsys::NetSysConfig env = default_env(1);
    PomdpModel true_model = netsys::build_model(env);
    PomdpModel conj_model = netsys::build_model(env, conjectured_p);
    ReferencePlan ref_true = reference_cost_function(true_model, r_ref);
    ReferencePlan ref_conj = reference_cost_function(conj_model, r_ref);
    std::vector<Belief> grid = belief_grid_n2(grid_points);

    CostFunEvalResult result;
    result.r_grid = r_grid;
    for (const Belief& b : grid) {
        result.b1.push_back(b[1]);
        result.j_true_ref.push_back(ref_true.cost_at(b));
        result.j_conj_ref.push_back(ref_conj.cost_at(b));
    }
    result.j_approx.resize(r_grid.size());
    parallel_for(r_grid.size(), [&](std::size_t i) {
        RepresentativeBeliefSet rep = enumerate_lattice(2, r_grid[i]);
        SolvedPlan plan = value_iteration(build_quantized_mdp(conj_model, rep), kReferenceViThreshold);
        std::vector<double> values;
        values.reserve(grid.size());
        for (const Belief& b : grid) values.push_back(approx_cost(plan, rep, b));
        result.j_approx[i] = std::move(values);
    });
    return result;
}

inline std::string costfun_eval_csv(const CostFunEvalResult& result) {
    CsvWriter csv("costfun-eval-v1");
    std::vector<std::string> header{"b1", "j_true_ref", "j_conj_ref"};
    for (int r : result.r_grid) header.push_back("j_r" + std::to_string(r));
    csv.header(header);
    for (std::size_t i = 0; i < result.b1.size(); ++i) {
        std::vector<std::string> cells{csv_double(result.b1[i]), csv_double(result.j_true_ref[i]),
                                       csv_double(result.j_conj_ref[i])};
        for (std::size_t ri = 0; ri < result.r_grid.size(); ++ri)
            cells.push_back(csv_double(result.j_approx[ri][i]));
        csv.row(cells);
    }
    return csv.str();
}

// ---------------------------------------------------------------------------
// run-loop: full episodes per seed, MOBAL or a scripted baseline strategy.
// ---------------------------------------------------------------------------

enum class StrategyKind { mobal, uniform_random, always_block };

struct RunLoopScenario {
    netsys::NetSysConfig env = default_env(1);
    std::vector<double> conjectured_p = {0.0, 0.5, 1.0};
    Posterior prior;  // uniform when empty
    int resolution = 5;
    double vi_threshold = 0.1;
    int particle_count = 50;
    FilterMode filter_mode = FilterMode::exact;
    FilterSource filter_source = FilterSource::mixture;
    ReplanPolicy replan_policy = ReplanPolicy::per_step;
    int horizon = 100;
    StrategyKind strategy = StrategyKind::mobal;
};

struct RunLoopSummary {
    std::uint64_t seed;
    double discounted_return;
    Posterior final_posterior;
    long impossible_observation_events;
    long degenerate_evidence_events;
    long zero_weight_particle_events;
    long plan_solves;
};

struct RunLoopResult {
    std::vector<RunLoopSummary> summaries;
    std::vector<EpisodeLog> logs;
    double mean_return = 0.0;
    double std_return = 0.0;
};

inline RunLoopResult run_loop_eval(const RunLoopScenario& scenario,
                                   const std::vector<std::uint64_t>& seeds, bool keep_logs = false) {
    PomdpModel env_model = netsys::build_model(scenario.env);
    LoopConfig base;
    if (scenario.strategy == StrategyKind::mobal) {
        base.conjecture_space = make_space(scenario.env, scenario.conjectured_p);
        base.prior = scenario.prior.empty() ? uniform_posterior(base.conjecture_space.size())
                                            : scenario.prior;
        base.resolution = scenario.resolution;
        base.vi_threshold = scenario.vi_threshold;
        base.particle_count = scenario.particle_count;
        base.filter_mode = scenario.filter_mode;
        base.filter_source = scenario.filter_source;
        base.replan_policy = scenario.replan_policy;
        base.horizon = scenario.horizon;
    }
    RunLoopResult result;
    result.summaries.resize(seeds.size());
    if (keep_logs) result.logs.resize(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t si) {
        EpisodeLog log;
        if (scenario.strategy == StrategyKind::mobal) {
            LoopConfig cfg = base;
            cfg.seed = seeds[si];
            log = run_episode(env_model, cfg);
        } else if (scenario.strategy == StrategyKind::uniform_random) {
            int n_actions = env_model.n_actions;
            log = run_scripted_episode(env_model, scenario.horizon, seeds[si],
                                       [n_actions](int, Rng& rng) {
                                           return static_cast<int>(rng() % n_actions);
                                       });
        } else {
            int block_all = env_model.n_actions - 1;
            log = run_scripted_episode(env_model, scenario.horizon, seeds[si],
                                       [block_all](int, Rng&) { return block_all; });
        }
        Posterior final_rho = log.records.empty() ? Posterior{} : log.records.back().posterior;
        result.summaries[si] = {seeds[si],
                                log.discounted_return,
                                std::move(final_rho),
                                log.impossible_observation_events,
                                log.degenerate_evidence_events,
                                log.zero_weight_particle_events,
                                log.plan_solves};
        if (keep_logs) result.logs[si] = std::move(log);
    });
    double mean = 0.0;
    for (const auto& s : result.summaries) mean += s.discounted_return;
    mean /= result.summaries.size();
    double var = 0.0;
    for (const auto& s : result.summaries) var += (s.discounted_return - mean) * (s.discounted_return - mean);
    result.mean_return = mean;
    result.std_return = result.summaries.size() > 1 ? std::sqrt(var / (result.summaries.size() - 1)) : 0.0;
    return result;
}

inline std::string run_loop_csv(const RunLoopResult& result) {
    CsvWriter csv("run-loop-v1");
    csv.comment("mean_return=" + csv_double(result.mean_return) +
                " std_return=" + csv_double(result.std_return));
    csv.header({"seed", "discounted_return", "final_posterior", "impossible_observation_events",
                "degenerate_evidence_events", "zero_weight_particle_events", "plan_solves"});
    for (const auto& s : result.summaries) {
        std::string rho;
        for (std::size_t i = 0; i < s.final_posterior.size(); ++i)
            rho += (i ? ";" : "") + csv_double(s.final_posterior[i]);
        csv.row({std::to_string(s.seed), csv_double(s.discounted_return), rho,
                 std::to_string(s.impossible_observation_events),
                 std::to_string(s.degenerate_evidence_events),
                 std::to_string(s.zero_weight_particle_events), std::to_string(s.plan_solves)});
    }
    return csv.str();
}

/// One row per step of one episode; the JSON mirror carries beliefs too.
inline std::string episode_csv(const EpisodeLog& log) {
    CsvWriter csv("episode-v1");
    csv.header({"t", "s", "o", "a", "conjecture_idx", "posterior", "cost", "discounted_return"});
    for (const auto& rec : log.records) {
        std::string rho;
        for (std::size_t i = 0; i < rec.posterior.size(); ++i)
            rho += (i ? ";" : "") + csv_double(rec.posterior[i]);
        csv.row({std::to_string(rec.t), std::to_string(rec.state), std::to_string(rec.observation),
                 std::to_string(rec.action), std::to_string(rec.conjecture_index), rho,
                 csv_double(rec.stage_cost), csv_double(rec.discounted_return)});
    }
    return csv.str();
}

inline void from_json(const nlohmann::json& j, RunLoopScenario& s) {
    if (j.contains("env")) s.env = j.at("env").get<netsys::NetSysConfig>();
    if (j.contains("conjectures")) s.conjectured_p = j.at("conjectures").get<std::vector<double>>();
    if (j.contains("prior")) s.prior = j.at("prior").get<Posterior>();
    if (j.contains("resolution")) s.resolution = j.at("resolution").get<int>();
    if (j.contains("vi_threshold")) s.vi_threshold = j.at("vi_threshold").get<double>();
    if (j.contains("particle_count")) s.particle_count = j.at("particle_count").get<int>();
    if (j.contains("filter_mode")) {
        std::string mode = j.at("filter_mode").get<std::string>();
        if (mode == "exact") s.filter_mode = FilterMode::exact;
        else if (mode == "particle") s.filter_mode = FilterMode::particle;
        else throw std::invalid_argument("filter_mode must be 'exact' or 'particle'");
    }
    if (j.contains("filter_source")) {
        std::string src = j.at("filter_source").get<std::string>();
        if (src == "mixture") s.filter_source = FilterSource::mixture;
        else if (src == "sampled") s.filter_source = FilterSource::sampled;
        else throw std::invalid_argument("filter_source must be 'mixture' or 'sampled'");
    }
    if (j.contains("replan")) {
        std::string rp = j.at("replan").get<std::string>();
        if (rp == "per-step") s.replan_policy = ReplanPolicy::per_step;
        else if (rp == "on-conjecture-change") s.replan_policy = ReplanPolicy::on_conjecture_change;
        else throw std::invalid_argument("replan must be 'per-step' or 'on-conjecture-change'");
    }
    if (j.contains("horizon")) s.horizon = j.at("horizon").get<int>();
    if (j.contains("policy")) {
        std::string p = j.at("policy").get<std::string>();
        if (p == "mobal") s.strategy = StrategyKind::mobal;
        else if (p == "random") s.strategy = StrategyKind::uniform_random;
        else if (p == "always-block") s.strategy = StrategyKind::always_block;
        else throw std::invalid_argument("policy must be 'mobal', 'random' or 'always-block'");
    }
}

}  // namespace mobal::experiments
