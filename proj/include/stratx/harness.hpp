#pragma once

// Batch experiment runner: repeated seeded pipeline runs, Found-% aggregation,
// likelihood statistics, length histograms and report export.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stratx/agents.hpp"
#include "stratx/game.hpp"
#include "stratx/pipeline.hpp"

namespace stratx {

struct ExperimentConfig {
    GameConfig game = default_config(EnvId::pacman);
    std::vector<EventOfInterestSpec> specs;
    int runs = 50;
    std::vector<std::size_t> sample_sizes{100};
    std::uint64_t base_seed = 0;
    double report_threshold = 0.6;
    bool canonical_grouping = false;
    PolicyKind policy = PolicyKind::scripted_greedy;
    double filter_threshold = kDefaultFilterThreshold;
    std::size_t episode_cap_factor = kDefaultEpisodeCapFactor;
    std::size_t histogram_bin_width = 5;

    EnvId environment() const noexcept { return game.env; }
    /// Throws ConfigError on runs < 1, an empty or zero sample size, no specs, or a threshold outside [0,1].
    void validate() const;
};

/// Seed of run `run_index`, shared by every (spec, sample size) cell.
inline std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run_index) {
    return derive_seed(base_seed, 0x72756eULL, run_index);
}

struct RunOutcome {
    bool ok = false;
    std::string failure;  // collection shortfall or other stage error
    std::vector<Strategy> strategies;
    LikelihoodTable table;
    StageTimings timings;
    bool normalized = false;
    std::vector<std::size_t> positive_lengths;
    std::vector<std::size_t> negative_lengths;
    std::vector<std::size_t> normalized_lengths;
};

struct FoundEntry {
    Strategy strategy;
    std::size_t runs_found = 0;
    double found_pct = 0.0;
};

struct LikelihoodStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t runs = 0;
};

/// "0.70(0.59,0.81)"
std::string format_likelihood(const LikelihoodStats& stats);

struct StrategyGroup {
    std::vector<Strategy> members;  // sorted
    std::size_t runs_found = 0;
    double found_pct = 0.0;
    bool grouped() const noexcept { return members.size() > 1; }
};

struct LengthHistogram {
    std::size_t bin_width = 5;
    /// bin start -> count, for positives, raw negatives and normalised negatives.
    std::map<std::size_t, std::size_t> positives;
    std::map<std::size_t, std::size_t> negatives;
    std::map<std::size_t, std::size_t> normalized;
};

struct CellReport {
    EventOfInterestSpec spec;
    std::size_t sample_size = 0;
    int runs = 0;
    int failed_runs = 0;
    std::vector<RunOutcome> outcomes;  // by run index
    std::vector<FoundEntry> found;     // every strategy; descending found-%, then strategy
    std::map<Event, LikelihoodStats> likelihoods;
    StageTimings mean_timings;
    LengthHistogram histogram;
    std::vector<StrategyGroup> groups;  // filled when canonical grouping is on
};

struct AggregateReport {
    ExperimentConfig config;
    std::vector<CellReport> cells;  // spec-major, then sample size
};

/// Runs every (spec, sample size, run) pipeline on `jobs` worker threads and
/// aggregates in run order, so the result does not depend on `jobs`.
AggregateReport run_experiment(const ExperimentConfig& config, unsigned jobs = 1);

/// Aggregates already-computed outcomes (by run index) into a cell.
CellReport aggregate_cell(const EventOfInterestSpec& spec, std::size_t sample_size, std::vector<RunOutcome> outcomes,
                          std::size_t histogram_bin_width, bool canonical_grouping);

/// Strategies at or above `threshold` (a fraction) of runs.
std::vector<FoundEntry> headline(const CellReport& cell, double threshold);
std::vector<StrategyGroup> headline_groups(const CellReport& cell, double threshold);

/// Merges strategies sharing (multiset of non-final events, final event). A group's
/// found-% counts runs containing any member. `runs` is the denominator.
std::vector<StrategyGroup> canonical_group(std::span<const std::vector<Strategy>> per_run, std::size_t runs);

enum class ReportFormat { json, csv };
ReportFormat parse_report_format(std::string_view text);

/// Writes raw, headline, likelihoods, histograms and timings files into `dir`
/// (created if missing). Only the timings file depends on wall-clock time.
/// Throws IoError with the offending path.
std::vector<std::filesystem::path> export_report(const AggregateReport& report, ReportFormat format,
                                                 const std::filesystem::path& dir);

}  // namespace stratx
