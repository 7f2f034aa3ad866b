#include "stratx/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include "stratx/errors.hpp"
#include "stratx/io.hpp"

namespace stratx {

namespace {

using nlohmann::json;

// Tolerance for comparing a found-% against the threshold; found-% values are k/runs.
constexpr double kPctEpsilon = 1e-9;

bool meets(double found_pct, double threshold) { return found_pct + kPctEpsilon >= threshold * 100.0; }

double pct(std::size_t found, std::size_t runs) {
    return runs == 0 ? 0.0 : 100.0 * static_cast<double>(found) / static_cast<double>(runs);
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_row(std::initializer_list<std::string> fields) {
    std::string out;
    bool first = true;
    for (const auto& f : fields) {
        if (!first) out += ',';
        out += csv_field(f);
        first = false;
    }
    return out + "\n";
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

RunOutcome run_one(const Game& game, const Policy& policy, const EventOfInterestSpec& spec, std::size_t n,
                   std::uint64_t seed, const PipelineOptions& options) {
    RunOutcome out;
    try {
        StrategyReport r = run_pipeline(game, policy, spec, n, seed, options);
        out.ok = true;
        out.strategies = std::move(r.strategies);
        out.table = std::move(r.table);
        out.timings = r.timings;
        out.normalized = r.normalized;
        out.positive_lengths = std::move(r.positive_lengths);
        out.negative_lengths = std::move(r.negative_lengths);
        out.normalized_lengths = std::move(r.normalized_lengths);
    } catch (const InsufficientTrajectories& e) {
        out.failure = e.what();
    } catch (const EmptyDatasetError& e) {
        out.failure = e.what();
    }
    return out;
}

json strategy_labels(const Strategy& s) { return labels(s.events); }

json group_json(const StrategyGroup& g) {
    json members = json::array();
    for (const auto& m : g.members) members.push_back(strategy_labels(m));
    return {{"members", members}, {"runs_found", g.runs_found}, {"found_pct", g.found_pct}, {"grouped", g.grouped()}};
}

std::string group_label(const StrategyGroup& g) { return to_string(g.members.front()); }

}  // namespace

void ExperimentConfig::validate() const {
    if (runs < 1) throw ConfigError("experiment runs must be >= 1");
    if (specs.empty()) throw ConfigError("experiment needs at least one event-of-interest spec");
    if (sample_sizes.empty()) throw ConfigError("experiment needs at least one sample size");
    for (auto n : sample_sizes) {
        if (n < 1) throw ConfigError("sample sizes must be >= 1");
    }
    if (!(report_threshold >= 0.0 && report_threshold <= 1.0)) throw ConfigError("report threshold must lie in [0,1]");
    if (!(filter_threshold >= 0.0 && filter_threshold <= 1.0)) throw ConfigError("filter threshold must lie in [0,1]");
    if (episode_cap_factor < 1) throw ConfigError("episode cap factor must be >= 1");
    if (histogram_bin_width < 1) throw ConfigError("histogram bin width must be >= 1");
    for (const auto& s : specs) {
        if (s.env() != game.env) throw ConfigError("spec '" + to_string(s) + "' belongs to another environment");
    }
}

std::string format_likelihood(const LikelihoodStats& stats) {
    return fixed2(stats.mean) + "(" + fixed2(stats.min) + "," + fixed2(stats.max) + ")";
}

std::vector<StrategyGroup> canonical_group(std::span<const std::vector<Strategy>> per_run, std::size_t runs) {
    using Key = std::pair<std::vector<Event>, Event>;
    std::map<Key, std::set<Strategy>> members;
    for (const auto& strategies : per_run) {
        for (const auto& s : strategies) {
            if (s.empty()) continue;
            std::vector<Event> head(s.events.begin(), s.events.end() - 1);
            std::sort(head.begin(), head.end());
            members[{std::move(head), s.events.back()}].insert(s);
        }
    }

    std::vector<StrategyGroup> out;
    for (auto& [key, set] : members) {
        StrategyGroup g;
        g.members.assign(set.begin(), set.end());
        for (const auto& strategies : per_run) {
            const bool hit = std::any_of(strategies.begin(), strategies.end(),
                                         [&](const Strategy& s) { return set.count(s) > 0; });
            if (hit) ++g.runs_found;
        }
        g.found_pct = pct(g.runs_found, runs);
        out.push_back(std::move(g));
    }
    std::stable_sort(out.begin(), out.end(), [](const StrategyGroup& a, const StrategyGroup& b) {
        if (a.runs_found != b.runs_found) return a.runs_found > b.runs_found;
        return a.members.front() < b.members.front();
    });
    return out;
}

CellReport aggregate_cell(const EventOfInterestSpec& spec, std::size_t sample_size, std::vector<RunOutcome> outcomes,
                          std::size_t histogram_bin_width, bool canonical_grouping) {
    CellReport cell{.spec = spec, .sample_size = sample_size};
    cell.runs = static_cast<int>(outcomes.size());
    cell.histogram.bin_width = histogram_bin_width;

    std::map<Strategy, std::size_t> counts;
    std::map<Event, std::vector<double>> values;
    std::size_t ok = 0;
    auto bin = [&](std::map<std::size_t, std::size_t>& h, const std::vector<std::size_t>& lengths) {
        for (auto len : lengths) ++h[(len / histogram_bin_width) * histogram_bin_width];
    };

    for (const auto& o : outcomes) {
        if (!o.ok) {
            ++cell.failed_runs;
            continue;
        }
        ++ok;
        for (const auto& s : o.strategies) ++counts[s];
        for (const auto& [event, entry] : o.table.entries()) values[event].push_back(entry.value);
        cell.mean_timings.collection_ms += o.timings.collection_ms;
        cell.mean_timings.normalization_ms += o.timings.normalization_ms;
        cell.mean_timings.likelihood_ms += o.timings.likelihood_ms;
        cell.mean_timings.clustering_ms += o.timings.clustering_ms;
        cell.mean_timings.extraction_ms += o.timings.extraction_ms;
        bin(cell.histogram.positives, o.positive_lengths);
        bin(cell.histogram.negatives, o.negative_lengths);
        bin(cell.histogram.normalized, o.normalized_lengths);
    }
    if (ok > 0) {
        const double k = static_cast<double>(ok);
        cell.mean_timings.collection_ms /= k;
        cell.mean_timings.normalization_ms /= k;
        cell.mean_timings.likelihood_ms /= k;
        cell.mean_timings.clustering_ms /= k;
        cell.mean_timings.extraction_ms /= k;
    }

    for (const auto& [s, c] : counts) {
        cell.found.push_back(FoundEntry{s, c, pct(c, outcomes.size())});
    }
    std::stable_sort(cell.found.begin(), cell.found.end(),
                     [](const FoundEntry& a, const FoundEntry& b) { return a.runs_found > b.runs_found; });

    for (const auto& [event, vs] : values) {
        LikelihoodStats st;
        st.runs = vs.size();
        st.min = *std::min_element(vs.begin(), vs.end());
        st.max = *std::max_element(vs.begin(), vs.end());
        for (double v : vs) st.mean += v;
        st.mean /= static_cast<double>(vs.size());
        cell.likelihoods[event] = st;
    }

    if (canonical_grouping) {
        std::vector<std::vector<Strategy>> per_run;
        for (const auto& o : outcomes) per_run.push_back(o.ok ? o.strategies : std::vector<Strategy>{});
        cell.groups = canonical_group(per_run, outcomes.size());
    }
    cell.outcomes = std::move(outcomes);
    return cell;
}

AggregateReport run_experiment(const ExperimentConfig& config, unsigned jobs) {
    config.validate();
    const auto game = make_game(config.game);
    const Policy policy = config.policy == PolicyKind::random ? Policy::random() : Policy::scripted_greedy();
    if (config.policy == PolicyKind::tabular) {
        throw ConfigError("experiments take random or scripted-greedy policies");
    }
    PipelineOptions options;
    options.threshold = config.filter_threshold;
    options.episode_cap_factor = config.episode_cap_factor;

    struct Task {
        std::size_t cell;
        std::size_t run;
    };
    std::vector<std::pair<const EventOfInterestSpec*, std::size_t>> cells;
    for (const auto& spec : config.specs) {
        for (auto n : config.sample_sizes) cells.emplace_back(&spec, n);
    }
    const auto runs = static_cast<std::size_t>(config.runs);
    std::vector<std::vector<RunOutcome>> results(cells.size(), std::vector<RunOutcome>(runs));
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (std::size_t r = 0; r < runs; ++r) tasks.push_back({c, r});
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) {
            const auto [c, r] = tasks[t];
            results[c][r] = run_one(*game, policy, *cells[c].first, cells[c].second, run_seed(config.base_seed, r), options);
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    AggregateReport report{.config = config};
    for (std::size_t c = 0; c < cells.size(); ++c) {
        report.cells.push_back(aggregate_cell(*cells[c].first, cells[c].second, std::move(results[c]),
                                              config.histogram_bin_width, config.canonical_grouping));
    }
    return report;
}

std::vector<FoundEntry> headline(const CellReport& cell, double threshold) {
    std::vector<FoundEntry> out;
    for (const auto& f : cell.found) {
        if (meets(f.found_pct, threshold)) out.push_back(f);
    }
    return out;
}

std::vector<StrategyGroup> headline_groups(const CellReport& cell, double threshold) {
    std::vector<StrategyGroup> out;
    for (const auto& g : cell.groups) {
        if (meets(g.found_pct, threshold)) out.push_back(g);
    }
    return out;
}

ReportFormat parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::json;
    if (text == "csv") return ReportFormat::csv;
    throw ConfigError("unknown report format '" + std::string(text) + "' (expected json or csv)");
}

std::vector<std::filesystem::path> export_report(const AggregateReport& report, ReportFormat format,
                                                 const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create report directory '" + dir.string() + "': " + ec.message());

    const auto& cfg = report.config;
    const double threshold = cfg.report_threshold;
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        const auto path = dir / name;
        write_file(path, text);
        written.push_back(path);
    };

    if (format == ReportFormat::json) {
        json cells = json::array(), heads = json::array(), lls = json::array(), hists = json::array(),
             times = json::array();
        for (const auto& cell : report.cells) {
            const std::string spec = to_string(cell.spec);
            json runs = json::array();
            for (std::size_t r = 0; r < cell.outcomes.size(); ++r) {
                const auto& o = cell.outcomes[r];
                json strategies = json::array();
                for (const auto& s : o.strategies) strategies.push_back(strategy_labels(s));
                runs.push_back({{"run", r},
                                {"seed", run_seed(cfg.base_seed, r)},
                                {"ok", o.ok},
                                {"failure", o.failure},
                                {"normalized", o.normalized},
                                {"strategies", strategies},
                                {"likelihoods", to_json(o.table)}});
            }
            json found = json::array();
            for (const auto& f : cell.found) {
                found.push_back({{"strategy", strategy_labels(f.strategy)},
                                 {"runs_found", f.runs_found},
                                 {"found_pct", f.found_pct}});
            }
            json ll = json::array();
            for (const auto& [event, st] : cell.likelihoods) {
                ll.push_back({{"event", event.label},
                              {"mean", st.mean},
                              {"min", st.min},
                              {"max", st.max},
                              {"runs", st.runs},
                              {"formatted", format_likelihood(st)}});
            }
            json groups = json::array();
            for (const auto& g : cell.groups) groups.push_back(group_json(g));
            cells.push_back({{"spec", spec},
                             {"sample_size", cell.sample_size},
                             {"runs", cell.runs},
                             {"failed_runs", cell.failed_runs},
                             {"run_results", runs},
                             {"strategies", found},
                             {"likelihoods", ll},
                             {"groups", groups}});

            json head = json::array();
            if (cfg.canonical_grouping) {
                for (const auto& g : headline_groups(cell, threshold)) head.push_back(group_json(g));
            } else {
                for (const auto& f : headline(cell, threshold)) {
                    head.push_back({{"strategy", strategy_labels(f.strategy)}, {"found_pct", f.found_pct}});
                }
            }
            heads.push_back({{"spec", spec}, {"sample_size", cell.sample_size}, {"strategies", head}});
            lls.push_back({{"spec", spec}, {"sample_size", cell.sample_size}, {"likelihoods", ll}});

            auto hist_json = [](const std::map<std::size_t, std::size_t>& h) {
                json a = json::array();
                for (const auto& [b, c] : h) a.push_back({{"bin_start", b}, {"count", c}});
                return a;
            };
            hists.push_back({{"spec", spec},
                             {"sample_size", cell.sample_size},
                             {"bin_width", cell.histogram.bin_width},
                             {"positives", hist_json(cell.histogram.positives)},
                             {"negatives", hist_json(cell.histogram.negatives)},
                             {"normalized_negatives", hist_json(cell.histogram.normalized)}});
            const auto& t = cell.mean_timings;
            times.push_back({{"spec", spec},
                             {"sample_size", cell.sample_size},
                             {"collection_ms", t.collection_ms},
                             {"normalization_ms", t.normalization_ms},
                             {"likelihood_ms", t.likelihood_ms},
                             {"clustering_ms", t.clustering_ms},
                             {"extraction_ms", t.extraction_ms},
                             {"total_ms", t.total_ms()}});
        }
        json raw = {{"schema", "stratx.raw/1"},
                    {"environment", std::string(to_string(cfg.environment()))},
                    {"policy", std::string(to_string(cfg.policy))},
                    {"runs", cfg.runs},
                    {"sample_sizes", cfg.sample_sizes},
                    {"base_seed", cfg.base_seed},
                    {"report_threshold", cfg.report_threshold},
                    {"filter_threshold", cfg.filter_threshold},
                    {"canonical_grouping", cfg.canonical_grouping},
                    {"cells", cells}};
        emit("raw.json", raw.dump(2) + "\n");
        emit("headline.json",
             json{{"schema", "stratx.headline/1"}, {"report_threshold", threshold}, {"cells", heads}}.dump(2) + "\n");
        emit("likelihoods.json", json{{"schema", "stratx.likelihoods/1"}, {"cells", lls}}.dump(2) + "\n");
        emit("histograms.json", json{{"schema", "stratx.histograms/1"}, {"cells", hists}}.dump(2) + "\n");
        emit("timings.json", json{{"schema", "stratx.timings/1"}, {"cells", times}}.dump(2) + "\n");
        return written;
    }

    std::string raw = csv_row({"spec", "sample_size", "strategy", "runs_found", "runs", "found_pct"});
    std::string head = csv_row({"spec", "sample_size", "strategy", "found_pct", "marker"});
    std::string ll = csv_row({"spec", "sample_size", "event", "likelihood", "mean", "min", "max", "runs"});
    std::string hist = csv_row({"spec", "sample_size", "set", "bin_start", "bin_end", "count"});
    std::string times = csv_row({"spec", "sample_size", "stage", "mean_ms"});
    for (const auto& cell : report.cells) {
        const std::string spec = to_string(cell.spec);
        const std::string n = std::to_string(cell.sample_size);
        for (const auto& f : cell.found) {
            raw += csv_row({spec, n, to_string(f.strategy), std::to_string(f.runs_found), std::to_string(cell.runs),
                            fixed2(f.found_pct)});
        }
        if (cfg.canonical_grouping) {
            for (const auto& g : headline_groups(cell, threshold)) {
                head += csv_row({spec, n, group_label(g), fixed2(g.found_pct), g.grouped() ? "*" : ""});
            }
        } else {
            for (const auto& f : headline(cell, threshold)) {
                head += csv_row({spec, n, to_string(f.strategy), fixed2(f.found_pct), ""});
            }
        }
        for (const auto& [event, st] : cell.likelihoods) {
            ll += csv_row({spec, n, event.label, format_likelihood(st), num(st.mean), num(st.min), num(st.max),
                           std::to_string(st.runs)});
        }
        auto hist_rows = [&](const char* set, const std::map<std::size_t, std::size_t>& h) {
            for (const auto& [b, c] : h) {
                hist += csv_row({spec, n, set, std::to_string(b), std::to_string(b + cell.histogram.bin_width - 1),
                                 std::to_string(c)});
            }
        };
        hist_rows("positives", cell.histogram.positives);
        hist_rows("negatives", cell.histogram.negatives);
        hist_rows("normalized_negatives", cell.histogram.normalized);
        const auto& t = cell.mean_timings;
        times += csv_row({spec, n, "collection", num(t.collection_ms)});
        times += csv_row({spec, n, "normalization", num(t.normalization_ms)});
        times += csv_row({spec, n, "likelihood", num(t.likelihood_ms)});
        times += csv_row({spec, n, "clustering", num(t.clustering_ms)});
        times += csv_row({spec, n, "extraction", num(t.extraction_ms)});
    }
    emit("raw.csv", raw);
    emit("headline.csv", head);
    emit("likelihoods.csv", ll);
    emit("histograms.csv", hist);
    emit("timings.csv", times);
    return written;
}

}  // namespace stratx
