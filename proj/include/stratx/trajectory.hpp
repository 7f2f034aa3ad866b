#pragma once

// Core domain types: events, steps, trajectories, event-of-interest specs
// and strategies.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stratx {

enum class EnvId : std::uint8_t { pacman, dungeon_crawler, bank_heist };

std::string_view to_string(EnvId env);
/// Accepts "pacman", "dungeon"/"dungeon_crawler", "bank_heist"/"bankheist". Throws ConfigError.
EnvId parse_env_id(std::string_view text);

/// Declared event vocabulary of an environment; every emitted label is one of these.
std::span<const std::string_view> event_vocabulary(EnvId env);

struct Event {
    EnvId env = EnvId::pacman;
    std::string label;

    friend auto operator<=>(const Event&, const Event&) = default;
};

/// Builds an event after checking the label against the vocabulary. Throws ConfigError.
Event make_event(EnvId env, std::string_view label);

enum class Action : std::uint8_t { up = 0, down = 1, left = 2, right = 3, drop_dynamite = 4 };
inline constexpr std::size_t kActionCount = 5;

std::string_view to_string(Action action);
Action action_from_index(int index);  // throws ConfigError

using Observation = std::vector<double>;

struct Step {
    Observation pre_state;   // empty unless observation recording is enabled
    Action action = Action::up;
    Event event;
    double reward = 0.0;
    Observation post_state;
};

struct Trajectory {
    EnvId env = EnvId::pacman;
    std::uint64_t episode_seed = 0;
    std::vector<Step> steps;

    std::size_t size() const noexcept { return steps.size(); }
    bool empty() const noexcept { return steps.empty(); }
};

struct Requirement {
    Event event;
    int count = 1;

    friend auto operator<=>(const Requirement&, const Requirement&) = default;
};

/// A goal expressed as a multiset of (event, count) requirements.
class EventOfInterestSpec {
public:
    /// Merges duplicate events and sorts requirements. Throws ConfigError on
    /// an empty list or a non-positive count.
    explicit EventOfInterestSpec(std::vector<Requirement> requirements);

    static EventOfInterestSpec single(Event event, int count = 1);

    const std::vector<Requirement>& requirements() const noexcept { return requirements_; }
    EnvId env() const noexcept { return requirements_.front().event.env; }

    friend bool operator==(const EventOfInterestSpec&, const EventOfInterestSpec&) = default;
    friend auto operator<=>(const EventOfInterestSpec&, const EventOfInterestSpec&) = default;

private:
    std::vector<Requirement> requirements_;
};

/// Parses e.g. "kill a ghost", "kill a ghost x2", "rob bank ×2 and destroy police car".
/// Requirements are separated by " and " or "+"; counts use a trailing "xN", "×N" or "*N".
EventOfInterestSpec parse_spec(EnvId env, std::string_view text);
std::string to_string(const EventOfInterestSpec& spec);

struct Strategy {
    std::vector<Event> events;

    bool empty() const noexcept { return events.empty(); }
    std::size_t size() const noexcept { return events.size(); }

    friend auto operator<=>(const Strategy&, const Strategy&) = default;
};

/// "{collect power-up, kill a ghost}"
std::string to_string(const Strategy& strategy);
std::vector<std::string> labels(std::span<const Event> events);

std::vector<Event> events_of(const Trajectory& trajectory);

/// True iff `candidate` is obtained from `sequence` by deleting zero or more
/// elements while keeping order.
bool is_subtrajectory(std::span<const Event> candidate, std::span<const Event> sequence);

/// Index of the earliest step whose prefix meets every requirement.
std::optional<std::size_t> satisfies(std::span<const Event> events, const EventOfInterestSpec& spec);
std::optional<std::size_t> satisfies(const Trajectory& trajectory, const EventOfInterestSpec& spec);

/// Incremental form of `satisfies` for use while an episode is running.
class SpecTracker {
public:
    explicit SpecTracker(const EventOfInterestSpec& spec);

    /// Feeds one event; returns true once every requirement is met.
    bool observe(const Event& event);
    bool satisfied() const noexcept { return outstanding_ == 0; }

private:
    const EventOfInterestSpec* spec_;
    std::vector<int> remaining_;
    std::size_t outstanding_;
};

}  // namespace stratx
