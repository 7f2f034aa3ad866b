#pragma once

// Serialization: line-oriented trajectory records, JSON documents for
// trajectories, datasets, reports, policies and experiment configs.
// Field names are documented in docs/schemas.md.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "stratx/agents.hpp"
#include "stratx/harness.hpp"
#include "stratx/pipeline.hpp"

namespace stratx {

/// Header lines "# stratx-trajectory v1", "# env: <id>", "# seed: <n>", then one
/// "<action-id>\t<event label>\t<reward>" line per step.
void write_trajectory_lines(std::ostream& out, const Trajectory& trajectory);
/// Throws ConfigError on malformed records (with the line number).
Trajectory read_trajectory_lines(std::istream& in);
Trajectory load_trajectory(const std::filesystem::path& path);
void save_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);

nlohmann::json to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const DatasetPair& data, const EventOfInterestSpec& spec);
nlohmann::json to_json(const LikelihoodTable& table);
nlohmann::json to_json(const Strategy& strategy);
/// Includes per-stage timings in milliseconds.
nlohmann::json to_json(const StrategyReport& report);

nlohmann::json to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& doc);

/// Keys: environment, env_config (optional path), specs, runs, sample_sizes,
/// base_seed, report_threshold, canonical_grouping, policy, filter_threshold,
/// episode_cap_factor, histogram_bin_width.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Writes `text` to `path`, throwing IoError with the path on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace stratx
