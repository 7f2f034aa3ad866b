#include "stratx/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "stratx/errors.hpp"

namespace stratx {

namespace {

constexpr std::uint64_t kPositiveStream = 0x706f73ULL;
constexpr std::uint64_t kNegativeStream = 0x6e6567ULL;
constexpr std::uint64_t kNormalizeStream = 0x6e6f726dULL;
constexpr std::uint64_t kDiscoverStream = 0x646973ULL;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::size_t cap_for(std::size_t n, std::size_t episode_cap) {
    return episode_cap == 0 ? kDefaultEpisodeCapFactor * n : episode_cap;
}

std::vector<std::size_t> lengths_of(std::span<const Trajectory> ts) {
    std::vector<std::size_t> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(t.size());
    return out;
}

Trajectory prefix(const Trajectory& t, std::size_t length) {
    Trajectory out;
    out.env = t.env;
    out.episode_seed = t.episode_seed;
    out.steps.assign(t.steps.begin(), t.steps.begin() + static_cast<std::ptrdiff_t>(std::min(length, t.size())));
    return out;
}

// Distinct events of a trajectory, for presence counting.
std::set<Event> present(const Trajectory& t) {
    std::set<Event> out;
    for (const auto& s : t.steps) out.insert(s.event);
    return out;
}

}  // namespace

Trajectory run_episode(const Game& game, const Policy& policy, std::uint64_t episode_seed,
                       const EventOfInterestSpec* stop_at, bool record_observations) {
    Trajectory traj;
    traj.env = game.id();
    traj.episode_seed = episode_seed;
    GameState state = game.reset(episode_seed);
    Rng rng(agent_seed(episode_seed));
    std::optional<SpecTracker> tracker;
    if (stop_at) tracker.emplace(*stop_at);

    while (!state.done) {
        const auto valid = game.valid_actions(state);
        const Action action = select_action(policy, AgentView{game, state}, valid, rng);
        Step step;
        if (record_observations) step.pre_state = game.observe(state);
        const StepResult r = game.step(state, action);
        step.action = action;
        step.event = r.event;
        step.reward = r.reward;
        if (record_observations) step.post_state = game.observe(state);
        traj.steps.push_back(std::move(step));
        if (tracker && tracker->observe(r.event)) break;
    }
    return traj;
}

std::set<EventOfInterestSpec> discover_from_episodes(std::span<const Trajectory> episodes, double* r_avg) {
    const std::size_t half = episodes.size() / 2;
    double mean = 0.0;
    if (half > 0) {
        for (std::size_t i = 0; i < half; ++i) {
            for (const auto& s : episodes[i].steps) mean += s.reward;
        }
        mean /= static_cast<double>(half);
    }
    if (r_avg) *r_avg = mean;

    std::set<EventOfInterestSpec> found;
    for (std::size_t i = half; i < episodes.size(); ++i) {
        for (const auto& s : episodes[i].steps) {
            if (s.reward > mean) found.insert(EventOfInterestSpec::single(s.event));
        }
    }
    return found;
}

std::set<EventOfInterestSpec> discover_events(const Game& game, const Policy& policy, int episodes,
                                              std::uint64_t seed, double* r_avg) {
    if (episodes < 2 || episodes % 2 != 0) throw ConfigError("discovery needs an even episode count >= 2");
    std::vector<Trajectory> runs;
    runs.reserve(static_cast<std::size_t>(episodes));
    for (int i = 0; i < episodes; ++i) {
        runs.push_back(run_episode(game, policy, derive_seed(seed, kDiscoverStream, static_cast<std::uint64_t>(i))));
    }
    return discover_from_episodes(runs, r_avg);
}

std::vector<Trajectory> collect_positive(const Game& game, const Policy& policy, const EventOfInterestSpec& spec,
                                         std::size_t n, std::uint64_t seed, std::size_t episode_cap) {
    if (n < 1) throw ConfigError("collect_positive needs n >= 1");
    const std::size_t cap = cap_for(n, episode_cap);
    std::vector<Trajectory> out;
    out.reserve(n);
    for (std::size_t k = 0; k < cap && out.size() < n; ++k) {
        Trajectory t = run_episode(game, policy, derive_seed(seed, kPositiveStream, k), &spec);
        if (!t.empty() && satisfies(t, spec) == t.size() - 1) out.push_back(std::move(t));
    }
    if (out.size() < n) {
        throw InsufficientTrajectories(InsufficientTrajectories::Kind::positive, out.size(), n);
    }
    return out;
}

std::vector<Trajectory> collect_negative(const Game& game, const EventOfInterestSpec& spec, std::size_t n,
                                         std::uint64_t seed, std::size_t episode_cap) {
    if (n < 1) throw ConfigError("collect_negative needs n >= 1");
    const std::size_t cap = cap_for(n, episode_cap);
    const Policy random = Policy::random();
    std::vector<Trajectory> out;
    out.reserve(n);
    for (std::size_t k = 0; k < cap && out.size() < n; ++k) {
        Trajectory t = run_episode(game, random, derive_seed(seed, kNegativeStream, k));
        if (!t.empty() && !satisfies(t, spec)) out.push_back(std::move(t));
    }
    if (out.size() < n) {
        throw InsufficientTrajectories(InsufficientTrajectories::Kind::negative, out.size(), n);
    }
    return out;
}

LengthStats length_stats(std::span<const Trajectory> trajectories) {
    LengthStats st;
    if (trajectories.empty()) return st;
    const double n = static_cast<double>(trajectories.size());
    for (const auto& t : trajectories) st.mean += static_cast<double>(t.size());
    st.mean /= n;
    double var = 0.0;
    for (const auto& t : trajectories) {
        const double d = static_cast<double>(t.size()) - st.mean;
        var += d * d;
    }
    st.stddev = std::sqrt(var / n);
    return st;
}

bool needs_normalization(std::span<const Trajectory> positives, std::span<const Trajectory> negatives) {
    constexpr double kTolerance = 1e-9;
    const auto p = length_stats(positives);
    const auto q = length_stats(negatives);
    if (std::abs(p.mean - q.mean) <= kTolerance && std::abs(p.stddev - q.stddev) <= kTolerance) return false;
    return q.mean >= p.mean;
}

std::vector<Trajectory> normalize(std::span<const Trajectory> positives, std::span<const Trajectory> negatives,
                                  Rng& rng) {
    if (positives.empty() || negatives.empty()) throw Error("normalize needs non-empty positive and negative sets");
    if (!needs_normalization(positives, negatives)) return {negatives.begin(), negatives.end()};

    // Targets are the positive lengths in random order: each draw is uniform over
    // the positive lengths and the full set reproduces their distribution.
    std::vector<std::size_t> targets = lengths_of(positives);
    for (std::size_t i = targets.size(); i > 1; --i) std::swap(targets[i - 1], targets[uniform_index(rng, i)]);

    const auto longest = std::max_element(negatives.begin(), negatives.end(),
                                          [](const Trajectory& a, const Trajectory& b) { return a.size() < b.size(); });
    std::vector<Trajectory> out;
    out.reserve(targets.size());
    std::vector<std::size_t> candidates;
    for (std::size_t target : targets) {
        candidates.clear();
        for (std::size_t i = 0; i < negatives.size(); ++i) {
            if (negatives[i].size() >= target) candidates.push_back(i);
        }
        if (candidates.empty()) {
            out.push_back(prefix(*longest, target));
        } else {
            out.push_back(prefix(negatives[candidates[uniform_index(rng, candidates.size())]], target));
        }
    }
    return out;
}

LikelihoodTable likelihoods(std::span<const Trajectory> positives, std::span<const Trajectory> negatives) {
    if (positives.empty()) throw Error("likelihoods need at least one positive trajectory");
    std::map<Event, std::pair<std::int64_t, std::int64_t>> counts;
    for (const auto& t : positives) {
        for (const auto& e : present(t)) ++counts[e].first;
    }
    for (const auto& t : negatives) {
        for (const auto& e : present(t)) ++counts[e].second;
    }

    const auto np = static_cast<std::int64_t>(positives.size());
    const auto nn = static_cast<std::int64_t>(negatives.size());
    LikelihoodTable table;
    for (const auto& [event, c] : counts) {
        const auto [cp, cn] = c;
        LikelihoodEntry entry;
        entry.positive_fraction = static_cast<double>(cp) / static_cast<double>(np);
        entry.negative_fraction = nn > 0 ? static_cast<double>(cn) / static_cast<double>(nn) : 0.0;
        if (cp == 0) {
            entry.value = 0.0;
        } else if (cn == 0) {
            entry.value = 1.0;
        } else {
            // One rounding: (cp/np - cn/nn) over a common denominator.
            const std::int64_t diff = cp * nn - cn * np;
            entry.value = diff <= 0 ? 0.0 : static_cast<double>(diff) / static_cast<double>(np * nn);
        }
        table.set(event, entry);
    }
    return table;
}

std::vector<Trajectory> filter_events(std::span<const Trajectory> positives, const LikelihoodTable& table,
                                      double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("filter threshold must lie in [0, 1]");
    std::vector<Trajectory> out;
    out.reserve(positives.size());
    for (const auto& t : positives) {
        Trajectory kept;
        kept.env = t.env;
        kept.episode_seed = t.episode_seed;
        for (const auto& s : t.steps) {
            if (!(table.at(s.event) < threshold)) kept.steps.push_back(s);
        }
        if (!kept.empty()) out.push_back(std::move(kept));
    }
    if (out.empty()) throw EmptyDatasetError("filtering removed every positive trajectory");
    return out;
}

std::vector<Cluster> cluster(std::span<const Trajectory> filtered) {
    std::map<Event, std::vector<std::size_t>> by_event;
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        for (const auto& e : present(filtered[i])) by_event[e].push_back(i);
    }
    std::vector<Cluster> out;
    out.reserve(by_event.size());
    for (auto& [event, members] : by_event) out.push_back(Cluster{event, std::move(members)});
    return out;
}

std::size_t shortest_member(const Cluster& c, std::span<const Trajectory> filtered) {
    std::size_t best = c.members.front();
    for (std::size_t m : c.members) {
        const auto& cand = filtered[m].steps;
        const auto& cur = filtered[best].steps;
        if (cand.size() != cur.size()) {
            if (cand.size() < cur.size()) best = m;
            continue;
        }
        const bool smaller = std::lexicographical_compare(
            cand.begin(), cand.end(), cur.begin(), cur.end(),
            [](const Step& a, const Step& b) { return a.event < b.event; });
        if (smaller) best = m;
    }
    return best;
}

std::vector<Strategy> extract(std::span<const Cluster> clusters, std::span<const Trajectory> filtered,
                              const LikelihoodTable& table, const AlignParams& params) {
    std::vector<std::vector<Event>> events;
    events.reserve(filtered.size());
    for (const auto& t : filtered) events.push_back(events_of(t));

    std::set<Strategy> found;
    for (const auto& c : clusters) {
        if (c.members.empty()) continue;
        const std::size_t shortest = shortest_member(c, filtered);
        for (std::size_t m : c.members) {
            if (m == shortest) continue;
            Strategy s = align_weighted(events[shortest], events[m], table, params);
            if (!s.empty()) found.insert(std::move(s));
        }
    }
    return {found.begin(), found.end()};
}

StrategyReport run_pipeline(const Game& game, const Policy& policy, const EventOfInterestSpec& spec, std::size_t n,
                            std::uint64_t seed, const PipelineOptions& options) {
    const std::size_t cap = options.episode_cap_factor * n;
    StrategyReport report{.spec = spec, .sample_size = n, .seed = seed};

    auto t0 = Clock::now();
    auto positives = collect_positive(game, policy, spec, n, seed, cap);
    auto negatives = collect_negative(game, spec, n, seed, cap);
    report.timings.collection_ms = ms_since(t0);

    t0 = Clock::now();
    Rng rng(derive_seed(seed, kNormalizeStream, 0));
    report.normalized = needs_normalization(positives, negatives);
    auto normalized = normalize(positives, negatives, rng);
    report.timings.normalization_ms = ms_since(t0);

    t0 = Clock::now();
    report.table = likelihoods(positives, normalized);
    auto filtered = filter_events(positives, report.table, options.threshold);
    report.timings.likelihood_ms = ms_since(t0);

    t0 = Clock::now();
    const auto clusters = cluster(filtered);
    report.timings.clustering_ms = ms_since(t0);

    t0 = Clock::now();
    report.strategies = extract(clusters, filtered, report.table, options.align);
    report.timings.extraction_ms = ms_since(t0);

    report.positive_lengths = lengths_of(positives);
    report.negative_lengths = lengths_of(negatives);
    report.normalized_lengths = lengths_of(normalized);
    if (options.keep_datasets) {
        report.datasets = DatasetPair{std::move(positives), std::move(negatives), std::move(normalized),
                                      std::move(filtered)};
    }
    return report;
}

}  // namespace stratx
