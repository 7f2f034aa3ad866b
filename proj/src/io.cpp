#include "stratx/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "stratx/errors.hpp"

namespace stratx {

using nlohmann::json;

namespace {

constexpr std::string_view kTrajectoryMagic = "# stratx-trajectory v1";

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

Action parse_action(const std::string& text) {
    for (std::size_t i = 0; i < kActionCount; ++i) {
        const Action a = action_from_index(static_cast<int>(i));
        if (text == to_string(a)) return a;
    }
    try {
        std::size_t used = 0;
        const int idx = std::stoi(text, &used);
        if (used == text.size()) return action_from_index(idx);
    } catch (const std::logic_error&) {
    }
    throw ConfigError("unknown action '" + text + "'");
}

json timings_json(const StageTimings& t) {
    return {{"collection_ms", t.collection_ms},     {"normalization_ms", t.normalization_ms},
            {"likelihood_ms", t.likelihood_ms},     {"clustering_ms", t.clustering_ms},
            {"extraction_ms", t.extraction_ms},     {"total_ms", t.total_ms()}};
}

json trajectories_json(const std::vector<Trajectory>& ts) {
    json a = json::array();
    for (const auto& t : ts) a.push_back(to_json(t));
    return a;
}

}  // namespace

void write_trajectory_lines(std::ostream& out, const Trajectory& trajectory) {
    out << kTrajectoryMagic << "\n";
    out << "# env: " << to_string(trajectory.env) << "\n";
    out << "# seed: " << trajectory.episode_seed << "\n";
    for (const auto& s : trajectory.steps) {
        out << to_string(s.action) << '\t' << s.event.label << '\t' << s.reward << "\n";
    }
}

Trajectory read_trajectory_lines(std::istream& in) {
    Trajectory t;
    bool have_env = false;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& why) -> ConfigError {
        return ConfigError("trajectory line " + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const std::string body = trim(std::string_view(text).substr(1));
            if (body.rfind("env:", 0) == 0) {
                t.env = parse_env_id(trim(std::string_view(body).substr(4)));
                have_env = true;
            } else if (body.rfind("seed:", 0) == 0) {
                try {
                    t.episode_seed = std::stoull(trim(std::string_view(body).substr(5)));
                } catch (const std::logic_error&) {
                    throw fail("bad seed");
                }
            }
            continue;
        }
        if (!have_env) throw fail("step record before '# env:' header");
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, '\t');) fields.push_back(trim(f));
        if (fields.size() != 3) throw fail("expected 3 tab-separated fields, got " + std::to_string(fields.size()));
        Step step;
        try {
            step.action = parse_action(fields[0]);
            step.event = make_event(t.env, fields[1]);
            std::size_t used = 0;
            step.reward = std::stod(fields[2], &used);
            if (used != fields[2].size()) throw fail("bad reward '" + fields[2] + "'");
        } catch (const ConfigError& e) {
            throw fail(e.what());
        } catch (const std::logic_error&) {
            throw fail("bad reward '" + fields[2] + "'");
        }
        t.steps.push_back(std::move(step));
    }
    if (!have_env) throw ConfigError("trajectory has no '# env:' header");
    return t;
}

Trajectory load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory '" + path.string() + "'");
    try {
        return read_trajectory_lines(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& trajectory) {
    std::ostringstream os;
    write_trajectory_lines(os, trajectory);
    write_file(path, os.str());
}

json to_json(const Trajectory& trajectory) {
    json steps = json::array();
    for (const auto& s : trajectory.steps) {
        json step = {{"action", std::string(to_string(s.action))}, {"event", s.event.label}, {"reward", s.reward}};
        if (!s.pre_state.empty()) step["pre_state"] = s.pre_state;
        if (!s.post_state.empty()) step["post_state"] = s.post_state;
        steps.push_back(std::move(step));
    }
    return {{"env", std::string(to_string(trajectory.env))},
            {"episode_seed", trajectory.episode_seed},
            {"steps", steps}};
}

Trajectory trajectory_from_json(const json& doc) {
    try {
        Trajectory t;
        t.env = parse_env_id(doc.at("env").get<std::string>());
        t.episode_seed = doc.value("episode_seed", std::uint64_t{0});
        for (const auto& s : doc.at("steps")) {
            Step step;
            step.action = parse_action(s.at("action").get<std::string>());
            step.event = make_event(t.env, s.at("event").get<std::string>());
            step.reward = s.value("reward", 0.0);
            if (s.contains("pre_state")) step.pre_state = s["pre_state"].get<Observation>();
            if (s.contains("post_state")) step.post_state = s["post_state"].get<Observation>();
            t.steps.push_back(std::move(step));
        }
        return t;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("trajectory json: ") + e.what());
    }
}

json to_json(const DatasetPair& data, const EventOfInterestSpec& spec) {
    return {{"spec", to_string(spec)},
            {"positives", trajectories_json(data.positives)},
            {"negatives", trajectories_json(data.negatives)},
            {"normalized_negatives", trajectories_json(data.normalized_negatives)},
            {"filtered_positives", trajectories_json(data.filtered_positives)}};
}

json to_json(const LikelihoodTable& table) {
    json a = json::array();
    for (const auto& [event, e] : table.entries()) {
        a.push_back({{"event", event.label},
                     {"likelihood", e.value},
                     {"positive_fraction", e.positive_fraction},
                     {"negative_fraction", e.negative_fraction}});
    }
    return a;
}

json to_json(const Strategy& strategy) { return labels(strategy.events); }

json to_json(const StrategyReport& report) {
    json strategies = json::array();
    for (const auto& s : report.strategies) strategies.push_back(to_json(s));
    json doc = {{"environment", std::string(to_string(report.spec.env()))},
                {"spec", to_string(report.spec)},
                {"sample_size", report.sample_size},
                {"seed", report.seed},
                {"normalized", report.normalized},
                {"likelihoods", to_json(report.table)},
                {"strategies", strategies},
                {"positive_lengths", report.positive_lengths},
                {"negative_lengths", report.negative_lengths},
                {"normalized_lengths", report.normalized_lengths},
                {"timings", timings_json(report.timings)}};
    if (report.datasets) doc["datasets"] = to_json(*report.datasets, report.spec);
    return doc;
}

json to_json(const Policy& policy) {
    json doc = {{"kind", std::string(to_string(policy.kind))}};
    if (policy.kind == PolicyKind::scripted_greedy) {
        doc["fuel_threshold"] = policy.scripted.fuel_threshold;
        doc["police_alert_distance"] = policy.scripted.police_alert_distance;
    }
    if (policy.kind == PolicyKind::tabular && policy.table) {
        json values = json::object();
        for (const auto& [key, row] : policy.table->values) values[std::to_string(key)] = row;
        doc["q_values"] = std::move(values);
    }
    return doc;
}

Policy policy_from_json(const json& doc) {
    try {
        const PolicyKind kind = parse_policy_kind(doc.at("kind").get<std::string>());
        switch (kind) {
        case PolicyKind::random:
            return Policy::random();
        case PolicyKind::scripted_greedy: {
            ScriptedParams p;
            p.fuel_threshold = doc.value("fuel_threshold", p.fuel_threshold);
            p.police_alert_distance = doc.value("police_alert_distance", p.police_alert_distance);
            return Policy::scripted_greedy(p);
        }
        case PolicyKind::tabular: {
            auto table = std::make_shared<QTable>();
            if (doc.contains("q_values")) {
                for (const auto& [key, row] : doc["q_values"].items()) {
                    table->values[std::stoull(key)] = row.get<std::array<double, kActionCount>>();
                }
            }
            return Policy::tabular(std::move(table));
        }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("policy json: ") + e.what());
    } catch (const std::logic_error& e) {
        throw ConfigError(std::string("policy json: ") + e.what());
    }
    throw ConfigError("policy json: unknown kind");
}

ExperimentConfig experiment_config_from_json(const json& doc, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    try {
        if (doc.contains("env_config")) {
            std::filesystem::path p = doc["env_config"].get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            c.game = load_game_config(p.string());
            if (doc.contains("environment") &&
                parse_env_id(doc["environment"].get<std::string>()) != c.game.env) {
                throw ConfigError("experiment environment does not match env_config");
            }
        } else {
            c.game = default_config(parse_env_id(doc.at("environment").get<std::string>()));
        }
        for (const auto& s : doc.at("specs")) c.specs.push_back(parse_spec(c.game.env, s.get<std::string>()));
        c.runs = doc.value("runs", c.runs);
        if (doc.contains("sample_sizes")) {
            c.sample_sizes.clear();
            for (const auto& n : doc["sample_sizes"]) {
                if (!n.is_number_integer() || n.get<long long>() < 1) {
                    throw ConfigError("sample sizes must be positive integers");
                }
                c.sample_sizes.push_back(n.get<std::size_t>());
            }
        }
        c.base_seed = doc.value("base_seed", c.base_seed);
        c.report_threshold = doc.value("report_threshold", c.report_threshold);
        c.canonical_grouping = doc.value("canonical_grouping", c.canonical_grouping);
        if (doc.contains("policy")) c.policy = parse_policy_kind(doc["policy"].get<std::string>());
        c.filter_threshold = doc.value("filter_threshold", c.filter_threshold);
        c.episode_cap_factor = doc.value("episode_cap_factor", c.episode_cap_factor);
        c.histogram_bin_width = doc.value("histogram_bin_width", c.histogram_bin_width);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open experiment config '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("experiment config '" + path.string() + "': " + e.what());
    }
    return experiment_config_from_json(doc, path.parent_path());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace stratx
