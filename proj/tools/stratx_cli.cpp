// stratx: command-line front end for discovery, extraction, experiments,
// trajectory replay and alignment-matrix dumps.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "stratx/agents.hpp"
#include "stratx/align.hpp"
#include "stratx/errors.hpp"
#include "stratx/game.hpp"
#include "stratx/harness.hpp"
#include "stratx/io.hpp"
#include "stratx/pipeline.hpp"

namespace {

using namespace stratx;
using nlohmann::json;

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnvOptions {
    std::string env;
    std::string env_config;

    GameConfig resolve() const {
        if (!env_config.empty()) {
            GameConfig c = load_game_config(env_config);
            if (!env.empty() && parse_env(env) != c.env) throw UsageError("--env does not match --env-config");
            return c;
        }
        if (env.empty()) throw UsageError("--env or --env-config is required");
        return default_config(parse_env(env));
    }

    static EnvId parse_env(const std::string& text) {
        try {
            return parse_env_id(text);
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
    }
};

void add_env_options(CLI::App* cmd, EnvOptions& opts) {
    cmd->add_option("--env", opts.env, "Environment id: pacman, dungeon_crawler, bank_heist");
    cmd->add_option("--env-config", opts.env_config, "JSON environment config (map, rewards, knobs)")
        ->check(CLI::ExistingFile);
}

struct PolicyOptions {
    std::string kind = "scripted-greedy";
    int train_episodes = 2000;
    std::uint64_t train_seed = 0;

    Policy resolve(const Game& game) const {
        PolicyKind k;
        try {
            k = parse_policy_kind(kind);
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
        switch (k) {
        case PolicyKind::random:
            return Policy::random();
        case PolicyKind::scripted_greedy:
            return Policy::scripted_greedy();
        case PolicyKind::tabular:
            break;
        }
        LearningParams params;
        params.seed = train_seed;
        return train_tabular(game, train_episodes, params).policy;
    }
};

void add_policy_options(CLI::App* cmd, PolicyOptions& opts) {
    cmd->add_option("--policy", opts.kind, "Policy: random, scripted-greedy, tabular")->capture_default_str();
    cmd->add_option("--train-episodes", opts.train_episodes, "Q-learning episodes for the tabular policy")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--train-seed", opts.train_seed, "Q-learning seed for the tabular policy")->capture_default_str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        write_file(out_path, text);
    }
}

std::string format_ms(double ms) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f ms", ms);
    return buf;
}

std::string report_text(const StrategyReport& r) {
    std::ostringstream os;
    os << "environment: " << to_string(r.spec.env()) << "\n";
    os << "spec: " << to_string(r.spec) << "\n";
    os << "samples: " << r.sample_size << "  seed: " << r.seed << "  normalized: " << (r.normalized ? "yes" : "no")
       << "\n";
    os << "likelihoods:\n";
    for (const auto& [event, e] : r.table.entries()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f", e.value);
        os << "  " << event.label << ": " << buf << "\n";
    }
    os << "strategies:\n";
    for (const auto& s : r.strategies) os << "  " << to_string(s) << "\n";
    const auto& t = r.timings;
    os << "timings: collection " << format_ms(t.collection_ms) << ", normalization " << format_ms(t.normalization_ms)
       << ", likelihood " << format_ms(t.likelihood_ms) << ", clustering " << format_ms(t.clustering_ms)
       << ", extraction " << format_ms(t.extraction_ms) << "\n";
    return os.str();
}

void save_dataset(const std::filesystem::path& dir, const char* name, const std::vector<Trajectory>& ts) {
    const auto sub = dir / name;
    std::filesystem::create_directories(sub);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        char file[32];
        std::snprintf(file, sizeof file, "%05zu.traj", i);
        save_trajectory(sub / file, ts[i]);
    }
}

int cmd_discover(const EnvOptions& env, const PolicyOptions& pol, int episodes, std::uint64_t seed,
                 const std::string& format, const std::string& out) {
    const auto game = make_game(env.resolve());
    const Policy policy = pol.resolve(*game);
    double r_avg = 0.0;
    const auto specs = discover_events(*game, policy, episodes, seed, &r_avg);
    if (format == "json") {
        json doc = {{"environment", std::string(to_string(game->id()))}, {"episodes", episodes}, {"seed", seed},
                    {"average_episode_reward", r_avg}, {"events_of_interest", json::array()}};
        for (const auto& s : specs) doc["events_of_interest"].push_back(to_string(s));
        emit(doc.dump(2) + "\n", out);
    } else {
        std::ostringstream os;
        os << "average episode reward: " << r_avg << "\n";
        for (const auto& s : specs) os << to_string(s) << "\n";
        emit(os.str(), out);
    }
    return 0;
}

int cmd_extract(const EnvOptions& env, const PolicyOptions& pol, const std::string& spec_text, std::size_t samples,
                std::uint64_t seed, double threshold, const std::string& format, const std::string& out,
                const std::string& save_dir) {
    if (spec_text.empty()) throw UsageError("--spec is required");
    const auto game = make_game(env.resolve());
    const Policy policy = pol.resolve(*game);
    EventOfInterestSpec spec = parse_spec(game->id(), spec_text);
    PipelineOptions options;
    options.threshold = threshold;
    options.keep_datasets = !save_dir.empty();
    const StrategyReport report = run_pipeline(*game, policy, spec, samples, seed, options);
    if (!save_dir.empty()) {
        const auto& d = *report.datasets;
        save_dataset(save_dir, "positives", d.positives);
        save_dataset(save_dir, "negatives", d.negatives);
        save_dataset(save_dir, "normalized_negatives", d.normalized_negatives);
    }
    if (format == "json") {
        json doc = to_json(report);
        doc.erase("datasets");
        emit(doc.dump(2) + "\n", out);
    } else {
        emit(report_text(report), out);
    }
    return 0;
}

int cmd_experiment(const std::string& config_path, std::optional<int> runs, std::optional<std::uint64_t> seed,
                   std::optional<double> threshold, const std::string& format, const std::string& out,
                   unsigned jobs) {
    ExperimentConfig config = load_experiment_config(config_path);
    if (runs) config.runs = *runs;
    if (seed) config.base_seed = *seed;
    if (threshold) config.report_threshold = *threshold;
    const ReportFormat fmt = parse_report_format(format);
    const AggregateReport report = run_experiment(config, jobs);
    const auto files = export_report(report, fmt, out.empty() ? "report" : out);
    for (const auto& cell : report.cells) {
        std::cout << to_string(cell.spec) << " (n=" << cell.sample_size << ", runs=" << cell.runs
                  << ", failed=" << cell.failed_runs << ")\n";
        if (config.canonical_grouping) {
            for (const auto& g : headline_groups(cell, config.report_threshold)) {
                std::printf("  %6.2f%%  %s%s\n", g.found_pct, to_string(g.members.front()).c_str(),
                            g.grouped() ? " *" : "");
            }
        } else {
            for (const auto& f : headline(cell, config.report_threshold)) {
                std::printf("  %6.2f%%  %s\n", f.found_pct, to_string(f.strategy).c_str());
            }
        }
        std::fflush(stdout);
    }
    for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
    return 0;
}

int cmd_replay(const std::string& path, const EnvOptions& env_opts, const std::string& out) {
    const Trajectory t = load_trajectory(path);
    EnvOptions opts = env_opts;
    if (opts.env.empty() && opts.env_config.empty()) opts.env = std::string(to_string(t.env));
    const GameConfig config = opts.resolve();
    if (config.env != t.env) throw UsageError("trajectory environment does not match the game config");
    const auto game = make_game(config);
    GameState state = game->reset(t.episode_seed);
    std::ostringstream os;
    os << "step 0\n" << game->render_text(state);
    int mismatches = 0;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const Step& recorded = t.steps[i];
        const StepResult r = game->step(state, recorded.action);
        os << "\nstep " << (i + 1) << ": " << to_string(recorded.action) << " -> " << r.event.label << " ("
           << r.reward << ")";
        if (r.event != recorded.event) {
            os << "  [recorded: " << recorded.event.label << "]";
            ++mismatches;
        }
        os << "\n" << game->render_text(state);
    }
    os << "\nscore: " << state.score << "  done: " << (state.done ? "yes" : "no") << "\n";
    emit(os.str(), out);
    if (mismatches > 0) {
        std::cerr << "replay diverged from the recorded events at " << mismatches << " step(s)\n";
        return kRuntimeError;
    }
    return 0;
}

LikelihoodTable load_likelihoods(const std::string& path, EnvId env) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open likelihood file '" + path + "'");
    json doc;
    try {
        in >> doc;
        const json& rows = doc.is_object() ? doc.at("likelihoods") : doc;
        LikelihoodTable table;
        for (const auto& row : rows) {
            table.set(make_event(env, row.at("event").get<std::string>()),
                      LikelihoodEntry{row.at("likelihood").get<double>(), row.value("positive_fraction", 0.0),
                                      row.value("negative_fraction", 0.0)});
        }
        return table;
    } catch (const json::exception& e) {
        throw ConfigError("likelihood file '" + path + "': " + e.what());
    }
}

int cmd_matrix(const std::string& path_a, const std::string& path_b, const std::string& weighting,
               const std::string& likelihood_path, const std::string& out) {
    const Trajectory a = load_trajectory(path_a);
    const Trajectory b = load_trajectory(path_b);
    if (a.env != b.env) throw UsageError("trajectories belong to different environments");
    const auto ea = events_of(a);
    const auto eb = events_of(b);

    WeightFunction weight;
    if (weighting == "reward") {
        weight = [&](std::size_t i, std::size_t j) {
            return std::max({1.0, a.steps[i].reward, b.steps[j].reward});
        };
    } else if (weighting == "likelihood") {
        if (likelihood_path.empty()) throw UsageError("--likelihoods is required for likelihood weighting");
        const LikelihoodTable table = load_likelihoods(likelihood_path, a.env);
        weight = [table, &ea, &eb](std::size_t i, std::size_t j) { return std::max(table.at(ea[i]), table.at(eb[j])); };
    } else if (weighting == "unit") {
        weight = [](std::size_t, std::size_t) { return 1.0; };
    } else {
        throw UsageError("unknown weighting '" + weighting + "' (expected reward, likelihood or unit)");
    }

    const AlignParams params;
    const ScoreMatrix m = build_matrix(ea, eb, params, weight);
    const Strategy s = traceback(m, ea, eb);
    std::ostringstream os;
    os << dump_matrix(m, ea, eb) << "\nstrategy: " << to_string(s) << "\n";
    emit(os.str(), out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Strategy extraction from game trajectories"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    EnvOptions env;
    PolicyOptions policy;
    // A strong agent's episode reward exceeds every single-step reward, so discovery defaults to random play.
    PolicyOptions discover_policy{.kind = "random"};
    std::string spec, config_path, save_dir, weighting = "reward", likelihoods, traj_a, traj_b, traj;
    std::size_t samples = 100;
    std::uint64_t seed = 0;
    double threshold = kDefaultFilterThreshold;
    int episodes = 100;
    unsigned jobs = 1;
    std::optional<int> runs_override;
    std::optional<std::uint64_t> seed_override;
    std::optional<double> threshold_override;
    std::string discover_out, discover_format = "text";
    std::string extract_out, extract_format = "json";
    std::string experiment_out = "report", experiment_format = "json";
    std::string replay_out, matrix_out;

    auto* discover = app.add_subcommand("discover", "Find events of interest from episode rewards");
    add_env_options(discover, env);
    add_policy_options(discover, discover_policy);
    discover->add_option("--episodes", episodes, "Episodes to simulate (even)")->capture_default_str();
    discover->add_option("--seed", seed, "Base seed")->capture_default_str();
    discover->add_option("--format", discover_format, "json or text")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    discover->add_option("--out", discover_out, "Output file (default: standard output)");

    auto* extract = app.add_subcommand("extract", "Run the pipeline once and print the strategy report");
    add_env_options(extract, env);
    add_policy_options(extract, policy);
    extract->add_option("--spec", spec, "Event-of-interest spec, e.g. \"kill a ghost x2\"")->required();
    extract->add_option("--samples", samples, "Positive and negative trajectories to collect")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    extract->add_option("--seed", seed, "Run seed")->capture_default_str();
    extract->add_option("--threshold", threshold, "Likelihood filter threshold")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    extract->add_option("--format", extract_format, "json or text")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    extract->add_option("--out", extract_out, "Output file (default: standard output)");
    extract->add_option("--save-trajectories", save_dir, "Directory to write the collected trajectories into");

    auto* experiment = app.add_subcommand("experiment", "Run the repeated-run protocol from a config file");
    experiment->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    experiment->add_option("--runs", runs_override, "Override the config's run count")->check(CLI::PositiveNumber);
    experiment->add_option("--seed", seed_override, "Override the config's base seed");
    experiment->add_option("--threshold", threshold_override, "Override the report threshold")
        ->check(CLI::Range(0.0, 1.0));
    experiment->add_option("--format", experiment_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    experiment->add_option("--out", experiment_out, "Report directory")->capture_default_str();
    experiment->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

    auto* replay = app.add_subcommand("replay", "Re-simulate a saved trajectory and print text frames");
    replay->add_option("trajectory", traj, "Trajectory file")->required()->check(CLI::ExistingFile);
    add_env_options(replay, env);
    replay->add_option("--out", replay_out, "Output file (default: standard output)");

    auto* matrix = app.add_subcommand("matrix", "Print the weighted alignment matrix of two saved trajectories");
    matrix->add_option("a", traj_a, "First trajectory file")->required()->check(CLI::ExistingFile);
    matrix->add_option("b", traj_b, "Second trajectory file")->required()->check(CLI::ExistingFile);
    matrix->add_option("--weight", weighting, "reward, likelihood or unit")->capture_default_str();
    matrix->add_option("--likelihoods", likelihoods, "Likelihood JSON (extract output or table) for likelihood weighting")
        ->check(CLI::ExistingFile);
    matrix->add_option("--out", matrix_out, "Output file (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*discover) return cmd_discover(env, discover_policy, episodes, seed, discover_format, discover_out);
        if (*extract) return cmd_extract(env, policy, spec, samples, seed, threshold, extract_format, extract_out,
                                         save_dir);
        if (*experiment) {
            return cmd_experiment(config_path, runs_override, seed_override, threshold_override, experiment_format,
                                  experiment_out, jobs);
        }
        if (*replay) return cmd_replay(traj, env, replay_out);
        if (*matrix) return cmd_matrix(traj_a, traj_b, weighting, likelihoods, matrix_out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return kUsageError;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kUsageError;
}
