#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "stratx/errors.hpp"
#include "stratx/io.hpp"
#include "test_support.hpp"

using namespace stratx;
using namespace stratx::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kData = STRATX_DATA_DIR;

void check_same(const Trajectory& a, const Trajectory& b) {
    CHECK(a.env == b.env);
    CHECK(a.episode_seed == b.episode_seed);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        CHECK(a.steps[i].action == b.steps[i].action);
        CHECK(a.steps[i].event == b.steps[i].event);
        CHECK(a.steps[i].reward == b.steps[i].reward);
        CHECK(a.steps[i].pre_state == b.steps[i].pre_state);
        CHECK(a.steps[i].post_state == b.steps[i].post_state);
    }
}

Trajectory parse_lines(const std::string& text) {
    std::istringstream in(text);
    return read_trajectory_lines(in);
}

std::string error_of(const std::string& text) {
    try {
        parse_lines(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("trajectory lines round-trip") {
    for (EnvId env : {EnvId::pacman, EnvId::dungeon_crawler, EnvId::bank_heist}) {
        const auto game = make_game(env);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Trajectory t = run_episode(*game, Policy::scripted_greedy(), seed);
            std::ostringstream out;
            write_trajectory_lines(out, t);
            Trajectory back = parse_lines(out.str());
            check_same(t, back);
        }
    }
}

TEST_CASE("trajectory json round-trips including observations") {
    const auto game = make_game(EnvId::bank_heist);
    const Trajectory t = run_episode(*game, Policy::random(), 3, nullptr, true);
    REQUIRE_FALSE(t.steps.empty());
    CHECK_FALSE(t.steps[0].pre_state.empty());
    check_same(t, trajectory_from_json(nlohmann::json::parse(to_json(t).dump())));
    CHECK_THROWS_AS(trajectory_from_json(nlohmann::json{{"env", "pacman"}}), ConfigError);
}

TEST_CASE("malformed trajectory records report their line") {
    const std::string header = "# stratx-trajectory v1\n# env: pacman\n# seed: 1\n";
    CHECK(error_of(header + "up\tmove\t0\nup\tmove\n").find("line 5") != std::string::npos);
    CHECK(error_of(header + "up\trob bank\t0\n").find("line 4") != std::string::npos);
    CHECK(error_of(header + "sideways\tmove\t0\n").find("line 4") != std::string::npos);
    CHECK(error_of(header + "up\tmove\t1x\n").find("line 4") != std::string::npos);
    CHECK(error_of("up\tmove\t0\n").find("line 1") != std::string::npos);
    CHECK_FALSE(error_of("# seed: 4\n").empty());
    CHECK(parse_lines(header + "\n0\tmove\t0\n").steps.at(0).action == Action::up);
}

TEST_CASE("bundled worked-example trajectories load") {
    const Trajectory a = load_trajectory(kData / "worked_example" / "a.traj");
    const Trajectory b = load_trajectory(kData / "worked_example" / "b.traj");
    CHECK(a.size() == 7);
    CHECK(b.size() == 6);
    CHECK(events_of(a).back() == pac("kill a ghost"));
    CHECK(a.steps[4].reward == 50.0);
    CHECK_THROWS_AS(load_trajectory(kData / "worked_example" / "missing.traj"), IoError);
}

TEST_CASE("save and load agree on disk") {
    const fs::path p = fs::temp_directory_path() / "stratx_io_roundtrip.traj";
    const Trajectory t = trajectory(EnvId::dungeon_crawler, events(EnvId::dungeon_crawler, {"collect key", "unlock door"}),
                                    {5.0, 50.0}, 42);
    save_trajectory(p, t);
    check_same(t, load_trajectory(p));
    fs::remove(p);
}

TEST_CASE("bundled experiment configs load and validate") {
    for (const char* name : {"pacman_experiment.json", "dungeon_crawler_experiment.json", "bank_heist_experiment.json"}) {
        CAPTURE(name);
        const ExperimentConfig c = load_experiment_config(kData / "configs" / name);
        CHECK(c.runs == 50);
        CHECK(c.base_seed == 1);
        CHECK(c.report_threshold == 0.6);
        CHECK_FALSE(c.specs.empty());
    }
    const ExperimentConfig d = load_experiment_config(kData / "configs" / "dungeon_crawler_experiment.json");
    CHECK(d.environment() == EnvId::dungeon_crawler);
    CHECK(d.sample_sizes == std::vector<std::size_t>{10, 100});
    CHECK(d.canonical_grouping);
    CHECK(d.game.layout == default_config(EnvId::dungeon_crawler).layout);
}

TEST_CASE("experiment config errors") {
    using nlohmann::json;
    const json ok = {{"environment", "pacman"}, {"specs", {"kill a ghost"}}, {"runs", 3}, {"sample_sizes", {10}}};
    CHECK(experiment_config_from_json(ok).runs == 3);
    auto bad = [&](const char* key, json value) {
        json doc = ok;
        doc[key] = std::move(value);
        CHECK_THROWS_AS(experiment_config_from_json(doc), ConfigError);
    };
    bad("runs", 0);
    bad("sample_sizes", json::array({-5}));
    bad("sample_sizes", json::array({2.5}));
    bad("specs", json::array({"rob bank"}));
    bad("environment", "tetris");
    bad("report_threshold", 2.0);
    bad("policy", "ppo");
    CHECK_THROWS_AS(experiment_config_from_json(json{{"specs", {"kill a ghost"}}}), ConfigError);
    CHECK_THROWS_AS(load_experiment_config(kData / "configs" / "absent.json"), IoError);
}

TEST_CASE("strategy report json carries the documented fields") {
    const auto game = make_game(EnvId::pacman);
    PipelineOptions opts;
    opts.keep_datasets = true;
    const StrategyReport r = run_pipeline(*game, Policy::scripted_greedy(), parse_spec(EnvId::pacman, "kill a ghost"), 20, 5, opts);
    const auto doc = to_json(r);
    for (const char* key : {"environment", "spec", "sample_size", "seed", "normalized", "likelihoods", "strategies",
                            "positive_lengths", "negative_lengths", "normalized_lengths", "timings", "datasets"}) {
        CAPTURE(key);
        CHECK(doc.contains(key));
    }
    CHECK(doc.at("spec") == "kill a ghost");
    CHECK(doc.at("sample_size") == 20);
    CHECK(doc.at("strategies").size() == r.strategies.size());
    for (const auto& entry : doc.at("likelihoods")) {
        CHECK(entry.contains("event"));
        CHECK(entry.at("likelihood").get<double>() >= 0.0);
    }
}

TEST_CASE("write_file reports unwritable paths") {
    CHECK_THROWS_AS(write_file("/proc/definitely/not/here.txt", "x"), IoError);
}
