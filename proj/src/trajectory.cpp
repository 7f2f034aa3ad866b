#include "stratx/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include "stratx/errors.hpp"

namespace stratx {

namespace {

constexpr std::array<std::string_view, 4> kPacmanEvents{
    "move", "collect dot", "collect power-up", "kill a ghost"};
constexpr std::array<std::string_view, 6> kDungeonEvents{
    "move",        "collect weapon (gun)", "collect weapon (sword)",
    "collect key", "kill a monster",       "unlock door"};
constexpr std::array<std::string_view, 5> kBankHeistEvents{
    "move", "rob bank", "drop dynamite", "destroy police car", "collect fuel"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Splits "label xN" into (label, N). Recognises 'x', 'X', '*' and the UTF-8 '×'.
std::pair<std::string_view, int> split_count(std::string_view part) {
    part = trim(part);
    std::size_t digits = part.size();
    while (digits > 0 && std::isdigit(static_cast<unsigned char>(part[digits - 1]))) --digits;
    if (digits == part.size() || digits == 0) return {part, 1};

    std::string_view head = part.substr(0, digits);
    std::string_view number = part.substr(digits);
    std::size_t marker = 0;
    if (head.ends_with("\xC3\x97")) {
        marker = 2;
    } else if (head.ends_with('x') || head.ends_with('X') || head.ends_with('*')) {
        marker = 1;
    }
    if (marker == 0) return {part, 1};
    std::string_view label = head.substr(0, head.size() - marker);
    if (!label.empty() && !std::isspace(static_cast<unsigned char>(label.back())) && marker == 1 &&
        head.back() != '*') {
        // "box2"-style labels: the x belongs to the word.
        return {part, 1};
    }
    int count = 0;
    auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), count);
    if (ec != std::errc{} || ptr != number.data() + number.size()) {
        throw ConfigError("bad requirement count in '" + std::string(part) + "'");
    }
    return {trim(label), count};
}

}  // namespace

std::string_view to_string(EnvId env) {
    switch (env) {
        case EnvId::pacman: return "pacman";
        case EnvId::dungeon_crawler: return "dungeon_crawler";
        case EnvId::bank_heist: return "bank_heist";
    }
    return "unknown";
}

EnvId parse_env_id(std::string_view text) {
    const std::string key = lower(trim(text));
    if (key == "pacman") return EnvId::pacman;
    if (key == "dungeon" || key == "dungeon_crawler" || key == "dungeon-crawler") {
        return EnvId::dungeon_crawler;
    }
    if (key == "bank_heist" || key == "bankheist" || key == "bank-heist") return EnvId::bank_heist;
    throw ConfigError("unknown environment id '" + std::string(text) + "'");
}

std::span<const std::string_view> event_vocabulary(EnvId env) {
    switch (env) {
        case EnvId::pacman: return kPacmanEvents;
        case EnvId::dungeon_crawler: return kDungeonEvents;
        case EnvId::bank_heist: return kBankHeistEvents;
    }
    return {};
}

Event make_event(EnvId env, std::string_view label) {
    auto vocab = event_vocabulary(env);
    if (std::find(vocab.begin(), vocab.end(), label) == vocab.end()) {
        throw ConfigError("event '" + std::string(label) + "' is not in the " +
                          std::string(to_string(env)) + " vocabulary");
    }
    return Event{env, std::string(label)};
}

std::string_view to_string(Action action) {
    switch (action) {
        case Action::up: return "up";
        case Action::down: return "down";
        case Action::left: return "left";
        case Action::right: return "right";
        case Action::drop_dynamite: return "drop-dynamite";
    }
    return "?";
}

Action action_from_index(int index) {
    if (index < 0 || index >= static_cast<int>(kActionCount)) {
        throw ConfigError("action id out of range: " + std::to_string(index));
    }
    return static_cast<Action>(index);
}

EventOfInterestSpec::EventOfInterestSpec(std::vector<Requirement> requirements) {
    if (requirements.empty()) throw ConfigError("event-of-interest spec needs a requirement");
    std::sort(requirements.begin(), requirements.end(),
              [](const Requirement& a, const Requirement& b) { return a.event < b.event; });
    for (auto& r : requirements) {
        if (r.count < 1) throw ConfigError("requirement count must be >= 1 for '" + r.event.label + "'");
        if (r.event.env != requirements.front().event.env) {
            throw ConfigError("spec mixes events from different environments");
        }
        if (!requirements_.empty() && requirements_.back().event == r.event) {
            requirements_.back().count += r.count;
        } else {
            requirements_.push_back(std::move(r));
        }
    }
}

EventOfInterestSpec EventOfInterestSpec::single(Event event, int count) {
    return EventOfInterestSpec({Requirement{std::move(event), count}});
}

EventOfInterestSpec parse_spec(EnvId env, std::string_view text) {
    std::vector<Requirement> reqs;
    std::string normalized(text);
    // Treat " and " the same as '+'.
    for (std::size_t pos; (pos = normalized.find(" and ")) != std::string::npos;) {
        normalized.replace(pos, 5, "+");
    }
    std::string_view rest = normalized;
    while (true) {
        const std::size_t plus = rest.find('+');
        const std::string_view part = rest.substr(0, plus);
        if (!trim(part).empty()) {
            auto [label, count] = split_count(part);
            reqs.push_back(Requirement{make_event(env, lower(label)), count});
        }
        if (plus == std::string_view::npos) break;
        rest.remove_prefix(plus + 1);
    }
    if (reqs.empty()) throw ConfigError("empty event-of-interest spec");
    return EventOfInterestSpec(std::move(reqs));
}

std::string to_string(const EventOfInterestSpec& spec) {
    std::string out;
    for (const auto& r : spec.requirements()) {
        if (!out.empty()) out += " and ";
        out += r.event.label;
        if (r.count > 1) out += " x" + std::to_string(r.count);
    }
    return out;
}

std::string to_string(const Strategy& strategy) {
    std::string out = "{";
    for (std::size_t i = 0; i < strategy.events.size(); ++i) {
        if (i) out += ", ";
        out += strategy.events[i].label;
    }
    return out + "}";
}

std::vector<std::string> labels(std::span<const Event> events) {
    std::vector<std::string> out;
    out.reserve(events.size());
    for (const auto& e : events) out.push_back(e.label);
    return out;
}

std::vector<Event> events_of(const Trajectory& trajectory) {
    std::vector<Event> out;
    out.reserve(trajectory.steps.size());
    for (const auto& step : trajectory.steps) out.push_back(step.event);
    return out;
}

bool is_subtrajectory(std::span<const Event> candidate, std::span<const Event> sequence) {
    std::size_t next = 0;
    for (const auto& e : sequence) {
        if (next == candidate.size()) break;
        if (candidate[next] == e) ++next;
    }
    return next == candidate.size();
}

SpecTracker::SpecTracker(const EventOfInterestSpec& spec)
    : spec_(&spec), outstanding_(spec.requirements().size()) {
    remaining_.reserve(spec.requirements().size());
    for (const auto& r : spec.requirements()) remaining_.push_back(r.count);
}

bool SpecTracker::observe(const Event& event) {
    const auto& reqs = spec_->requirements();
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        if (remaining_[i] > 0 && reqs[i].event == event) {
            if (--remaining_[i] == 0) --outstanding_;
            break;
        }
    }
    return satisfied();
}

std::optional<std::size_t> satisfies(std::span<const Event> events, const EventOfInterestSpec& spec) {
    SpecTracker tracker(spec);
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (tracker.observe(events[i])) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> satisfies(const Trajectory& trajectory, const EventOfInterestSpec& spec) {
    const auto events = events_of(trajectory);
    return satisfies(events, spec);
}

}  // namespace stratx
