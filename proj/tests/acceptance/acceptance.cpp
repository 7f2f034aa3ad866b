// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stratx/align.hpp"
#include "stratx/errors.hpp"
#include "stratx/harness.hpp"
#include "stratx/io.hpp"
#include "stratx/pipeline.hpp"
#include "test_support.hpp"

using namespace stratx;
using namespace stratx::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kData = STRATX_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 2) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(precision);
    s << v;
    return s.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

double found_pct(const CellReport& cell, const Strategy& s) {
    for (const auto& f : cell.found) {
        if (f.strategy == s) return f.found_pct;
    }
    return 0.0;
}

const CellReport& cell_for(const AggregateReport& r, const std::string& spec, std::size_t n) {
    for (const auto& c : r.cells) {
        if (to_string(c.spec) == spec && c.sample_size == n) return c;
    }
    throw Error("no cell for " + spec + " at n=" + std::to_string(n));
}

// Experiment reports shared by several criteria, computed once.
const AggregateReport& pacman_report(double* seconds = nullptr) {
    static double elapsed = 0.0;
    static const AggregateReport report = [] {
        const auto t0 = Clock::now();
        AggregateReport r = run_experiment(load_experiment_config(kData / "configs" / "pacman_experiment.json"), 1);
        elapsed = seconds_since(t0);
        return r;
    }();
    if (seconds) *seconds = elapsed;
    return report;
}

const AggregateReport& dungeon_report() {
    static const AggregateReport report = [] {
        ExperimentConfig c = load_experiment_config(kData / "configs" / "dungeon_crawler_experiment.json");
        c.specs = {parse_spec(EnvId::dungeon_crawler, "kill a monster")};
        c.sample_sizes = {10, 100};
        c.runs = 50;
        return run_experiment(c, 1);
    }();
    return report;
}

Outcome worked_example_alignment() {
    const auto a = events(EnvId::pacman, {"move", "collect dot", "move", "move", "collect power-up", "move", "kill a ghost"});
    const auto b = events(EnvId::pacman, {"move", "collect power-up", "move", "collect dot", "move", "kill a ghost"});
    auto reward = [](const Event& e) {
        if (e.label == "collect dot") return 10.0;
        if (e.label == "collect power-up") return 50.0;
        if (e.label == "kill a ghost") return 200.0;
        return 0.0;
    };
    const WeightFunction w = [&](std::size_t i, std::size_t j) { return std::max({1.0, reward(a[i]), reward(b[j])}); };
    const auto expected = events(EnvId::pacman, {"move", "collect power-up", "move", "kill a ghost"});

    constexpr int kReps = 1000;
    Strategy s;
    const auto t0 = Clock::now();
    for (int i = 0; i < kReps; ++i) s = traceback(build_matrix(a, b, AlignParams{}, w), a, b);
    const double mean_ms = seconds_since(t0) * 1000.0 / kReps;
    return {s.events == expected && mean_ms < 1.0, "strategy " + to_string(s) + ", " + fmt(mean_ms, 4) + " ms per alignment"};
}

Outcome likelihood_arithmetic() {
    // Ten positives and ten negatives built to the presence fractions of each event.
    auto build = [](std::initializer_list<std::pair<const char*, int>> presence) {
        std::vector<Trajectory> out;
        for (int i = 0; i < 10; ++i) {
            std::vector<Event> evs;
            for (const auto& [label, count] : presence) {
                if (i < count) evs.push_back(pac(label));
            }
            if (evs.empty()) evs.push_back(pac("collect dot"));
            out.push_back(trajectory(EnvId::pacman, evs));
        }
        return out;
    };
    const auto simple = likelihoods(build({{"collect power-up", 10}}), build({{"collect power-up", 2}}));
    const bool simple_ok = simple.at(pac("collect power-up")) == 0.8;

    const auto pos = build({{"move", 10}, {"collect dot", 3}, {"collect power-up", 10}, {"kill a ghost", 10}});
    const auto neg = build({{"move", 10}, {"collect dot", 2}, {"collect power-up", 2}});
    const auto t = likelihoods(pos, neg);
    const double move = t.at(pac("move")), dot = t.at(pac("collect dot")), power = t.at(pac("collect power-up")),
                 kill = t.at(pac("kill a ghost"));
    const bool table_ok = move == 0.0 && dot == 0.1 && power == 0.8 && kill == 1.0;
    std::ostringstream d;
    d.precision(17);
    d << "0.8 case " << simple.at(pac("collect power-up")) << "; table move " << move << ", dot " << dot << ", power-up "
      << power << ", kill " << kill;
    return {simple_ok && table_ok, d.str()};
}

Outcome pacman_single() {
    double secs = 0.0;
    const auto& r = pacman_report(&secs);
    const double pct = found_pct(cell_for(r, "kill a ghost", 100),
                                 Strategy{events(EnvId::pacman, {"collect power-up", "kill a ghost"})});
    return {pct >= 90.0 && secs <= 600.0,
            "{collect power-up, kill a ghost} in " + fmt(pct, 1) + "% of 50 runs; experiment took " + fmt(secs) + " s"};
}

Outcome pacman_compound() {
    const auto& r = pacman_report();
    const double pct = found_pct(cell_for(r, "kill a ghost x2", 100),
                                 Strategy{events(EnvId::pacman, {"collect power-up", "kill a ghost", "kill a ghost"})});
    return {pct >= 80.0, "{collect power-up, kill a ghost, kill a ghost} in " + fmt(pct, 1) + "% of 50 runs"};
}

Outcome dungeon_weapons() {
    const auto& cell = cell_for(dungeon_report(), "kill a monster", 100);
    const auto d = [](std::initializer_list<const char*> l) { return Strategy{events(EnvId::dungeon_crawler, l)}; };
    const double gun = found_pct(cell, d({"collect weapon (gun)", "kill a monster"}));
    const double sword = found_pct(cell, d({"collect weapon (sword)", "kill a monster"}));
    return {gun >= 85.0 && sword >= 85.0, "gun plan " + fmt(gun, 1) + "%, sword plan " + fmt(sword, 1) + "% of 50 runs"};
}

Outcome sample_size_trend() {
    const auto& r = dungeon_report();
    const Event key = ev(EnvId::dungeon_crawler, "collect key");
    auto mean_at = [&](std::size_t n) {
        const auto& cell = cell_for(r, "kill a monster", n);
        const auto it = cell.likelihoods.find(key);
        return it == cell.likelihoods.end() ? 1.0 : it->second.mean;
    };
    const double small = mean_at(10), large = mean_at(100);
    return {small - large >= 0.2, "collect key likelihood " + fmt(small) + " at n=10, " + fmt(large) + " at n=100"};
}

Outcome oracle_equivalence() {
    Rng rng(0x5eed);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const auto a = random_sequence(rng, EnvId::dungeon_crawler, 6, 6);
        const auto b = random_sequence(rng, EnvId::dungeon_crawler, 6, 6);
        std::vector<double> w(a.size() * b.size());
        for (double& x : w) x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const WeightFunction weight = [&](std::size_t i, std::size_t j) { return w[i * b.size() + j]; };
        const double dp = max_value(build_matrix(a, b, AlignParams{}, weight));
        worst = std::max(worst, std::abs(dp - brute_force_local_score(a, b, 1.0, -1.0, 0.0, weight)));
    }
    std::ostringstream d;
    d << "200 pairs, largest difference " << worst;
    return {worst <= 1e-12, d.str()};
}

Outcome normalization_property() {
    const auto game = make_game(EnvId::dungeon_crawler);
    int normalized = 0, trials = 0, bad = 0;
    double worst = 0.0;
    for (const char* spec : {"unlock door", "collect key"}) {
        for (int seed = 0; seed < 25; ++seed) {
            PipelineOptions opts;
            opts.keep_datasets = true;
            std::optional<StrategyReport> report;
            try {
                report = run_pipeline(*game, Policy::scripted_greedy(), parse_spec(EnvId::dungeon_crawler, spec), 100,
                                 derive_seed(808, 0, static_cast<std::uint64_t>(seed)), opts);
            } catch (const InsufficientTrajectories&) {
                continue;
            } catch (const EmptyDatasetError&) {
                continue;
            }
            ++trials;
            const StrategyReport& r = *report;
            if (!r.normalized) continue;
            ++normalized;
            const auto& d = *r.datasets;
            auto mean = [](const std::vector<Trajectory>& ts) {
                double s = 0.0;
                for (const auto& t : ts) s += static_cast<double>(t.size());
                return s / static_cast<double>(ts.size());
            };
            const double p = mean(d.positives), q = mean(d.normalized_negatives);
            const double rel = std::abs(q - p) / p;
            worst = std::max(worst, rel);
            if (d.normalized_negatives.size() != d.positives.size() || rel > 0.15) ++bad;
        }
    }
    return {normalized > 0 && bad == 0, std::to_string(normalized) + " of " + std::to_string(trials) +
                                            " trials normalised, worst mean-length gap " + fmt(worst * 100.0, 1) + "%"};
}

Outcome subtrajectory_property() {
    Rng rng(9001);
    int failures = 0;
    for (int k = 0; k < 1000; ++k) {
        const EnvId env = std::array{EnvId::pacman, EnvId::dungeon_crawler, EnvId::bank_heist}[k % 3];
        const auto a = random_sequence(rng, env, 15, 6);
        const auto b = random_sequence(rng, env, 15, 6);
        LikelihoodTable table;
        for (auto label : event_vocabulary(env)) {
            table.set(ev(env, std::string(label)), LikelihoodEntry{std::uniform_real_distribution<double>(0.0, 1.0)(rng), 0, 0});
        }
        const Strategy s = align_weighted(a, b, table);
        if (!is_subtrajectory(s.events, b.size() < a.size() ? b : a)) ++failures;
    }
    return {failures == 0, std::to_string(failures) + " of 1000 strategies outside the shorter input"};
}

Outcome cli_determinism() {
#ifndef STRATX_CLI_PATH
    return {false, "command-line tool was not built"};
#else
    const fs::path root = fs::temp_directory_path() / "stratx_acceptance_cli";
    fs::remove_all(root);
    const fs::path config = kData / "configs" / "pacman_experiment.json";
    auto invoke = [&](unsigned jobs, int attempt, const char* format) {
        const fs::path out = root / (std::string(format) + "_j" + std::to_string(jobs) + "_" + std::to_string(attempt));
        const std::string cmd = std::string("\"") + STRATX_CLI_PATH + "\" experiment --config \"" + config.string() +
                                "\" --format " + format + " --jobs " + std::to_string(jobs) + " --out \"" + out.string() +
                                "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) throw Error("command failed: " + cmd);
        return out;
    };
    bool same = true;
    for (const char* format : {"json", "csv"}) {
        const std::string file = std::string("raw.") + format;
        const std::string reference = slurp(invoke(1, 0, format) / file);
        if (reference.empty()) same = false;
        for (const auto& [jobs, attempt] : std::vector<std::pair<unsigned, int>>{{1, 1}, {8, 0}, {8, 1}}) {
            if (slurp(invoke(jobs, attempt, format) / file) != reference) same = false;
        }
    }
    fs::remove_all(root);
    return {same, "raw.json and raw.csv compared across two invocations each at 1 and 8 workers"};
#endif
}

Outcome timing_property() {
    const auto game = make_game(EnvId::dungeon_crawler);
    StageTimings sum;
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto r = run_pipeline(*game, Policy::scripted_greedy(), parse_spec(EnvId::dungeon_crawler, "kill a monster"),
                                    200, derive_seed(77, 0, seed));
        sum.collection_ms += r.timings.collection_ms;
        sum.normalization_ms += r.timings.normalization_ms;
        sum.likelihood_ms += r.timings.likelihood_ms;
        sum.clustering_ms += r.timings.clustering_ms;
        sum.extraction_ms += r.timings.extraction_ms;
        ++ok;
    }
    const double total = sum.total_ms();
    const double collection = sum.collection_ms / total;
    const double rest = 1.0 - collection;
    return {ok > 0 && collection > 0.5 && rest <= 0.10,
            "collection " + fmt(collection * 100.0, 1) + "%, other stages " + fmt(rest * 100.0, 1) + "% over " +
                std::to_string(ok) + " runs"};
}

Outcome reporting_threshold() {
    constexpr double kThreshold = 0.6;
    const AggregateReport& report = dungeon_report();
    const fs::path dir = fs::temp_directory_path() / "stratx_acceptance_threshold";
    fs::remove_all(dir);
    export_report(report, ReportFormat::json, dir);
    const std::string dump = nlohmann::json::parse(slurp(dir / "raw.json")).dump();
    fs::remove_all(dir);

    std::size_t below = 0, leaked = 0, missing = 0;
    for (const auto& cell : report.cells) {
        for (const auto& e : headline(cell, kThreshold)) {
            if (e.found_pct < 60.0) ++leaked;
        }
        for (const auto& g : headline_groups(cell, kThreshold)) {
            if (g.found_pct < 60.0) ++leaked;
        }
        for (const auto& f : cell.found) {
            if (f.found_pct >= 60.0) continue;
            ++below;
            const std::string text = to_string(f.strategy);
            if (dump.find(nlohmann::json(text).dump()) == std::string::npos &&
                dump.find(nlohmann::json(labels(f.strategy.events)).dump()) == std::string::npos) {
                ++missing;
            }
        }
    }
    return {below > 0 && leaked == 0 && missing == 0,
            std::to_string(below) + " strategies below 60%, " + std::to_string(leaked) + " in headline, " +
                std::to_string(missing) + " missing from raw output"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"worked-example alignment", worked_example_alignment},
        {"likelihood arithmetic", likelihood_arithmetic},
        {"pacman kill a ghost", pacman_single},
        {"pacman kill a ghost x2", pacman_compound},
        {"dungeon weapon plans", dungeon_weapons},
        {"sample-size likelihood trend", sample_size_trend},
        {"alignment oracle equivalence", oracle_equivalence},
        {"normalisation lengths", normalization_property},
        {"subtrajectory property", subtrajectory_property},
        {"experiment determinism", cli_determinism},
        {"stage timing", timing_property},
        {"reporting threshold", reporting_threshold},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " " << criteria[i].first << ": "
                  << o.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
