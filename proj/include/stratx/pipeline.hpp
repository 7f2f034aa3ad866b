#pragma once

// Strategy-extraction pipeline: event-of-interest discovery, trajectory
// collection, length normalisation, event likelihoods, filtering, clustering
// and pairwise-alignment extraction.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "stratx/agents.hpp"
#include "stratx/align.hpp"
#include "stratx/game.hpp"
#include "stratx/likelihood.hpp"
#include "stratx/trajectory.hpp"

namespace stratx {

inline constexpr double kDefaultFilterThreshold = 0.1;
inline constexpr std::size_t kDefaultEpisodeCapFactor = 100;

/// Runs one episode. With `stop_at`, the episode ends at the step that satisfies it.
Trajectory run_episode(const Game& game, const Policy& policy, std::uint64_t episode_seed,
                       const EventOfInterestSpec* stop_at = nullptr, bool record_observations = false);

/// r_avg = mean total reward of the first half of `episodes`; every event in the
/// second half whose single-step reward exceeds r_avg becomes a singleton spec.
std::set<EventOfInterestSpec> discover_from_episodes(std::span<const Trajectory> episodes, double* r_avg = nullptr);

/// Simulates `episodes` episodes (must be even and >= 2) and applies discover_from_episodes.
std::set<EventOfInterestSpec> discover_events(const Game& game, const Policy& policy, int episodes,
                                              std::uint64_t seed, double* r_avg = nullptr);

/// `n` trajectories from `policy`, each truncated at its satisfaction index.
/// episode_cap = 0 means kDefaultEpisodeCapFactor * n. Throws InsufficientTrajectories.
std::vector<Trajectory> collect_positive(const Game& game, const Policy& policy, const EventOfInterestSpec& spec,
                                         std::size_t n, std::uint64_t seed, std::size_t episode_cap = 0);

/// `n` whole random-agent episodes that never satisfy `spec`. Throws InsufficientTrajectories.
std::vector<Trajectory> collect_negative(const Game& game, const EventOfInterestSpec& spec, std::size_t n,
                                         std::uint64_t seed, std::size_t episode_cap = 0);

struct LengthStats {
    double mean = 0.0;
    double stddev = 0.0;  // population
};
LengthStats length_stats(std::span<const Trajectory> trajectories);

/// False when the length distributions match (mean and stddev within 1e-9) or
/// negatives are shorter on average.
bool needs_normalization(std::span<const Trajectory> positives, std::span<const Trajectory> negatives);

/// Resamples negatives to the positives' length distribution. Each positive length,
/// in random order, becomes a target: draw a negative at least that long and keep
/// its prefix, or take the longest negative's prefix when none is long enough.
/// Returns the negatives unchanged when needs_normalization() is false.
std::vector<Trajectory> normalize(std::span<const Trajectory> positives, std::span<const Trajectory> negatives,
                                  Rng& rng);

/// Presence-fraction likelihoods. Throws Error if `positives` is empty.
LikelihoodTable likelihoods(std::span<const Trajectory> positives, std::span<const Trajectory> negatives);

/// Drops steps whose event likelihood is strictly below `threshold`, then empty
/// trajectories. Throws ConfigError for a threshold outside [0,1] and
/// EmptyDatasetError when nothing survives.
std::vector<Trajectory> filter_events(std::span<const Trajectory> positives, const LikelihoodTable& table,
                                      double threshold = kDefaultFilterThreshold);

struct Cluster {
    Event anchor;
    std::vector<std::size_t> members;  // indices into the filtered positives

    friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// One cluster per distinct event, ordered by event.
std::vector<Cluster> cluster(std::span<const Trajectory> filtered);

/// Index of the cluster member with the fewest events (ties: lexicographically
/// smallest event sequence, then lowest index).
std::size_t shortest_member(const Cluster& c, std::span<const Trajectory> filtered);

/// For each cluster, aligns its shortest member with every other member and
/// collects the non-empty results. Returned sorted and deduplicated.
std::vector<Strategy> extract(std::span<const Cluster> clusters, std::span<const Trajectory> filtered,
                              const LikelihoodTable& table, const AlignParams& params = {});

struct StageTimings {
    double collection_ms = 0.0;
    double normalization_ms = 0.0;
    double likelihood_ms = 0.0;  // likelihoods + filtering
    double clustering_ms = 0.0;
    double extraction_ms = 0.0;

    double total_ms() const {
        return collection_ms + normalization_ms + likelihood_ms + clustering_ms + extraction_ms;
    }
};

struct DatasetPair {
    std::vector<Trajectory> positives;
    std::vector<Trajectory> negatives;
    std::vector<Trajectory> normalized_negatives;
    std::vector<Trajectory> filtered_positives;
};

struct PipelineOptions {
    double threshold = kDefaultFilterThreshold;
    std::size_t episode_cap_factor = kDefaultEpisodeCapFactor;
    AlignParams align;
    bool keep_datasets = false;
};

struct StrategyReport {
    EventOfInterestSpec spec;
    std::size_t sample_size = 0;
    std::uint64_t seed = 0;
    LikelihoodTable table;
    std::vector<Strategy> strategies;
    StageTimings timings;
    bool normalized = false;
    std::vector<std::size_t> positive_lengths;
    std::vector<std::size_t> negative_lengths;
    std::vector<std::size_t> normalized_lengths;
    std::optional<DatasetPair> datasets;
};

/// Collection, normalisation, likelihoods and filtering, clustering, extraction.
/// Deterministic in (game config, policy, spec, n, seed). Propagates stage errors.
StrategyReport run_pipeline(const Game& game, const Policy& policy, const EventOfInterestSpec& spec, std::size_t n,
                            std::uint64_t seed, const PipelineOptions& options = {});

}  // namespace stratx
