#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stratx/align.hpp"
#include "stratx/errors.hpp"
#include "stratx/harness.hpp"
#include "stratx/io.hpp"
#include "stratx/pipeline.hpp"

namespace py = pybind11;
using namespace stratx;

namespace {

py::object to_python(const nlohmann::json& doc) {
    return py::module_::import("json").attr("loads")(doc.dump());
}

nlohmann::json from_python(const py::object& obj) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

GameConfig resolve_config(const std::string& env, const std::optional<std::string>& env_config) {
    if (env_config) {
        GameConfig c = load_game_config(*env_config);
        if (c.env != parse_env_id(env)) throw ConfigError("env does not match env_config");
        return c;
    }
    return default_config(parse_env_id(env));
}

Policy resolve_policy(const std::string& kind, const Game& game, int train_episodes, std::uint64_t train_seed) {
    switch (parse_policy_kind(kind)) {
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

std::vector<Event> to_events(EnvId env, const std::vector<std::string>& labels) {
    std::vector<Event> out;
    out.reserve(labels.size());
    for (const auto& l : labels) out.push_back(make_event(env, l));
    return out;
}

py::list strategy_list(const Strategy& s) {
    py::list out;
    for (const auto& e : s.events) out.append(e.label);
    return out;
}

}  // namespace

PYBIND11_MODULE(_stratx, m) {
    m.doc() = "Strategy extraction from symbolic game trajectories";
    m.attr("__version__") = "0.1.0";

    static py::exception<Error> stratx_error(m, "StratxError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const IoError& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        } catch (const Error& e) {
            py::set_error(stratx_error, e.what());
        }
    });

    m.def("environments", [] {
        return std::vector<std::string>{std::string(to_string(EnvId::pacman)),
                                        std::string(to_string(EnvId::dungeon_crawler)),
                                        std::string(to_string(EnvId::bank_heist))};
    });

    m.def(
        "vocabulary",
        [](const std::string& env) {
            std::vector<std::string> out;
            for (auto l : event_vocabulary(parse_env_id(env))) out.emplace_back(l);
            return out;
        },
        py::arg("env"), "Event labels the environment can emit.");

    m.def(
        "parse_spec", [](const std::string& env, const std::string& text) { return to_string(parse_spec(parse_env_id(env), text)); },
        py::arg("env"), py::arg("text"), "Canonical form of an event-of-interest spec.");

    m.def(
        "play",
        [](const std::string& env, std::uint64_t seed, const std::string& policy, std::optional<std::string> env_config) {
            const auto game = make_game(resolve_config(env, env_config));
            return to_python(to_json(run_episode(*game, resolve_policy(policy, *game, 2000, 0), seed)));
        },
        py::arg("env"), py::arg("seed") = 0, py::arg("policy") = "random", py::arg("env_config") = py::none(),
        "Plays one episode and returns the trajectory as a dict.");

    m.def(
        "discover",
        [](const std::string& env, int episodes, std::uint64_t seed, const std::string& policy,
           std::optional<std::string> env_config) {
            const auto game = make_game(resolve_config(env, env_config));
            double r_avg = 0.0;
            std::vector<std::string> specs;
            {
                py::gil_scoped_release release;
                for (const auto& s : discover_events(*game, resolve_policy(policy, *game, 2000, 0), episodes, seed, &r_avg)) {
                    specs.push_back(to_string(s));
                }
            }
            py::dict out;
            out["average_episode_reward"] = r_avg;
            out["events_of_interest"] = specs;
            return out;
        },
        py::arg("env"), py::arg("episodes") = 100, py::arg("seed") = 0, py::arg("policy") = "random",
        py::arg("env_config") = py::none());

    m.def(
        "extract",
        [](const std::string& env, const std::string& spec, std::size_t samples, std::uint64_t seed, double threshold,
           const std::string& policy, std::optional<std::string> env_config) {
            const auto game = make_game(resolve_config(env, env_config));
            const Policy pol = resolve_policy(policy, *game, 2000, 0);
            const EventOfInterestSpec parsed = parse_spec(game->id(), spec);
            PipelineOptions options;
            options.threshold = threshold;
            std::optional<StrategyReport> report;
            {
                py::gil_scoped_release release;
                report = run_pipeline(*game, pol, parsed, samples, seed, options);
            }
            return to_python(to_json(*report));
        },
        py::arg("env"), py::arg("spec"), py::arg("samples") = 100, py::arg("seed") = 0,
        py::arg("threshold") = kDefaultFilterThreshold, py::arg("policy") = "scripted-greedy",
        py::arg("env_config") = py::none(), "Runs the pipeline once and returns the strategy report as a dict.");

    m.def(
        "align",
        [](const std::string& env, const std::vector<std::string>& a, const std::vector<std::string>& b,
           const std::optional<std::map<std::string, double>>& likelihoods) {
            const EnvId id = parse_env_id(env);
            LikelihoodTable table;
            if (likelihoods) {
                for (const auto& [label, v] : *likelihoods) table.set(make_event(id, label), LikelihoodEntry{v, 0.0, 0.0});
            }
            return strategy_list(align_weighted(to_events(id, a), to_events(id, b), table));
        },
        py::arg("env"), py::arg("a"), py::arg("b"), py::arg("likelihoods") = py::none(),
        "Likelihood-weighted alignment; events missing from `likelihoods` weigh 1.");

    m.def(
        "align_matrix",
        [](const std::string& env, const std::vector<std::string>& a, const std::vector<std::string>& b,
           const std::optional<std::vector<double>>& weights_a, const std::optional<std::vector<double>>& weights_b) {
            const EnvId id = parse_env_id(env);
            const auto ea = to_events(id, a);
            const auto eb = to_events(id, b);
            const std::vector<double> wa = weights_a.value_or(std::vector<double>(a.size(), 1.0));
            const std::vector<double> wb = weights_b.value_or(std::vector<double>(b.size(), 1.0));
            if (wa.size() != a.size() || wb.size() != b.size()) throw ConfigError("one weight per event is required");
            const ScoreMatrix matrix = build_matrix(ea, eb, AlignParams{}, [&](std::size_t i, std::size_t j) {
                return std::max({1.0, wa[i], wb[j]});
            });
            std::vector<std::vector<double>> values(matrix.rows(), std::vector<double>(matrix.cols()));
            for (std::size_t i = 0; i < matrix.rows(); ++i) {
                for (std::size_t j = 0; j < matrix.cols(); ++j) values[i][j] = matrix.value(i, j);
            }
            py::dict out;
            out["strategy"] = strategy_list(traceback(matrix, ea, eb));
            out["values"] = values;
            out["text"] = dump_matrix(matrix, ea, eb);
            return out;
        },
        py::arg("env"), py::arg("a"), py::arg("b"), py::arg("weights_a") = py::none(), py::arg("weights_b") = py::none(),
        "Alignment matrix with W = max(1, weight_a[i], weight_b[j]), e.g. step rewards.");

    m.def(
        "run_experiment",
        [](const py::object& config, unsigned jobs, std::optional<std::string> out_dir, const std::string& format) {
            const ExperimentConfig cfg = experiment_config_from_json(from_python(config));
            const ReportFormat fmt = parse_report_format(format);
            std::optional<AggregateReport> report;
            {
                py::gil_scoped_release release;
                report = run_experiment(cfg, jobs);
                if (out_dir) export_report(*report, fmt, *out_dir);
            }
            py::list cells;
            for (const auto& cell : report->cells) {
                py::list found;
                for (const auto& f : cell.found) {
                    py::dict row;
                    row["strategy"] = strategy_list(f.strategy);
                    row["found_pct"] = f.found_pct;
                    found.append(row);
                }
                py::dict d;
                d["spec"] = to_string(cell.spec);
                d["sample_size"] = cell.sample_size;
                d["runs"] = cell.runs;
                d["failed_runs"] = cell.failed_runs;
                d["found"] = found;
                cells.append(d);
            }
            return cells;
        },
        py::arg("config"), py::arg("jobs") = 1, py::arg("out_dir") = py::none(), py::arg("format") = "json",
        "Runs an experiment from a config dict (same keys as the JSON config file).");
}
