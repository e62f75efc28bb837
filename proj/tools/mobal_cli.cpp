// Command-line harness for the incident-response planning library: emits the
// observation-model, lattice-count, filter-accuracy, posterior, error-bound
// and cost-function studies as CSV, and runs full episodes per seed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mobal/mobal.hpp"

namespace {

using namespace mobal;
using namespace mobal::experiments;

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
    std::vector<std::uint64_t> seeds;
    auto range_pos = spec.find("..");
    if (range_pos != std::string::npos) {
        std::uint64_t a = std::stoull(spec.substr(0, range_pos));
        std::uint64_t b = std::stoull(spec.substr(range_pos + 2));
        if (b < a) throw std::invalid_argument("--seeds: empty range");
        for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
        return seeds;
    }
    std::size_t pos = 0;
    while (pos < spec.size()) {
        auto comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        seeds.push_back(std::stoull(spec.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (seeds.empty()) throw std::invalid_argument("--seeds: no seeds given");
    return seeds;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

std::string strip_csv_suffix(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") return path.substr(0, path.size() - 4);
    return path;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mobal: online incident-response planning under model misspecification"};
    app.require_subcommand(1);

    std::string out_path;
    std::string config_path;
    std::string seeds_spec = "0..99";
    std::vector<int> r_list;
    std::vector<int> m_list;
    std::vector<int> n_list;
    int steps = 100;
    int episodes = 100;

    auto add_common = [&](CLI::App* cmd, bool needs_out = true) {
        auto* opt = cmd->add_option("--out", out_path, "output CSV path");
        if (needs_out) opt->required();
        cmd->add_option("--seeds", seeds_spec, "seed range a..b or comma list");
        cmd->add_option("--config", config_path, "JSON config path");
        cmd->add_option("--r", r_list, "quantization resolutions")->delimiter(',');
        cmd->add_option("--m", m_list, "particle counts")->delimiter(',');
        cmd->add_option("--n", n_list, "component counts")->delimiter(',');
        cmd->add_option("--steps", steps, "time steps per episode");
        cmd->add_option("--episodes", episodes, "episodes per seed");
    };

    auto* obs_dist = app.add_subcommand("obs-dist", "per-component alert distributions");
    add_common(obs_dist);
    auto* lattice = app.add_subcommand("lattice-count", "representative-belief counts");
    add_common(lattice);
    auto* filter = app.add_subcommand("filter-eval", "particle-filter accuracy study");
    add_common(filter);
    auto* posterior = app.add_subcommand("posterior-eval", "posterior and discrepancy study");
    add_common(posterior);
    auto* bound = app.add_subcommand("bound-eval", "error bound vs measured error study");
    add_common(bound);
    auto* costfun = app.add_subcommand("costfun-eval", "cost-function sweep study");
    add_common(costfun);
    auto* run_loop = app.add_subcommand("run-loop", "full episodes per seed");
    add_common(run_loop);
    bool episode_logs = true;
    run_loop->add_flag("--episode-logs,!--no-episode-logs", episode_logs,
                       "write per-episode CSV/JSON logs next to --out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad flags are config errors
    }

    try {
        std::vector<std::uint64_t> seeds = parse_seeds(seeds_spec);

        if (obs_dist->parsed()) {
            write_file(out_path, obs_dist_csv(obs_dist_rows()));
        } else if (lattice->parsed()) {
            std::vector<int> n_grid = n_list.empty() ? std::vector<int>{2, 4, 8} : n_list;
            std::vector<int> r_grid = r_list;
            if (r_grid.empty())
                for (int r = 0; r <= 8; ++r) r_grid.push_back(r);
            write_file(out_path, lattice_count_csv(lattice_count_rows(n_grid, r_grid)));
        } else if (filter->parsed()) {
            FilterEvalProtocol proto;
            if (!n_list.empty()) proto.component_grid = n_list;
            if (!m_list.empty()) proto.m_grid = m_list;
            proto.episodes = episodes;
            proto.steps = steps;
            proto.seeds = seeds;
            write_file(out_path, filter_eval_csv(filter_eval(proto)));
        } else if (posterior->parsed()) {
            write_file(out_path, posterior_eval_csv(posterior_eval(steps, seeds)));
        } else if (bound->parsed()) {
            std::vector<int> r_grid = r_list.empty() ? std::vector<int>{1, 2, 5, 10, 20, 50} : r_list;
            write_file(out_path, bound_eval_csv(bound_eval(r_grid)));
        } else if (costfun->parsed()) {
            std::vector<int> r_grid = r_list.empty() ? std::vector<int>{1, 5, 50} : r_list;
            write_file(out_path, costfun_eval_csv(costfun_eval(r_grid)));
        } else if (run_loop->parsed()) {
            RunLoopScenario scenario;
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw std::invalid_argument("cannot open config: " + config_path);
                nlohmann::json j = nlohmann::json::parse(in);
                scenario = j.get<RunLoopScenario>();
            }
            if (run_loop->count("--steps")) scenario.horizon = steps;
            RunLoopResult result = run_loop_eval(scenario, seeds, episode_logs);
            write_file(out_path, run_loop_csv(result));
            if (episode_logs) {
                std::string stem = strip_csv_suffix(out_path);
                for (std::size_t i = 0; i < seeds.size(); ++i) {
                    write_file(stem + "_ep" + std::to_string(seeds[i]) + ".csv",
                               episode_csv(result.logs[i]));
                    nlohmann::json j = result.logs[i];
                    write_file(stem + "_ep" + std::to_string(seeds[i]) + ".json", j.dump(2) + "\n");
                }
            }
        }
    } catch (const capacity_error& e) {
        std::cerr << "capacity guard: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
