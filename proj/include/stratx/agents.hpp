#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stratx/game.hpp"
#include "stratx/rng.hpp"

namespace stratx {

enum class PolicyKind : std::uint8_t { random, scripted_greedy, tabular };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view text);  // throws ConfigError

struct ScriptedParams {
    /// Bank Heist: head for fuel when the tank drops below this level.
    int fuel_threshold = 40;
    /// Bank Heist: drop dynamite when a police car is this close (grid steps).
    int police_alert_distance = 2;
};

/// Action values keyed by a hash of the observation.
struct QTable {
    std::unordered_map<std::uint64_t, std::array<double, kActionCount>> values;
};

struct Policy {
    PolicyKind kind = PolicyKind::random;
    ScriptedParams scripted;
    std::shared_ptr<const QTable> table;  // tabular only

    static Policy random() { return {}; }
    static Policy scripted_greedy(ScriptedParams params = {}) {
        return Policy{PolicyKind::scripted_greedy, params, nullptr};
    }
    static Policy tabular(std::shared_ptr<const QTable> table) {
        return Policy{PolicyKind::tabular, {}, std::move(table)};
    }
};

/// What a policy sees when choosing: the game, its current state, and the observation
/// (computed lazily by the tabular kind). Scripted agents plan on the symbolic state.
struct AgentView {
    const Game& game;
    const GameState& state;
};

/// Precondition: `valid` non-empty (throws ActionError otherwise). Always returns a member of `valid`.
Action select_action(const Policy& policy, const AgentView& view, std::span<const Action> valid, Rng& rng);

std::uint64_t observation_key(const Observation& obs);

struct LearningParams {
    double learning_rate = 0.1;
    double discount = 0.95;
    double epsilon = 0.1;
    std::uint64_t seed = 0;
};

struct TrainingResult {
    Policy policy;
    std::vector<double> episode_rewards;
};

/// Epsilon-greedy Q-learning over observation keys. Throws ConfigError if episodes < 1.
TrainingResult train_tabular(const Game& game, int episodes, const LearningParams& params);

struct EpisodeSummary {
    double total_reward = 0.0;
    std::vector<StepResult> steps;
};

/// Plays one episode to termination.
EpisodeSummary play_episode(const Game& game, const Policy& policy, std::uint64_t episode_seed);

/// Seed of the agent's private RNG stream for an episode.
inline std::uint64_t agent_seed(std::uint64_t episode_seed) { return derive_seed(episode_seed, 0xa6e47ULL, 0); }

}  // namespace stratx
