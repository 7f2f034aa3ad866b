#pragma once

#include <initializer_list>
#include <map>
#include <utility>

#include "stratx/trajectory.hpp"

namespace stratx {

struct LikelihoodEntry {
    double value = 1.0;
    /// Share of positive / normalised-negative trajectories containing the event.
    double positive_fraction = 0.0;
    double negative_fraction = 0.0;

    friend bool operator==(const LikelihoodEntry&, const LikelihoodEntry&) = default;
};

/// Event -> likelihood in [0, 1]. Events missing from the table have likelihood 1.
class LikelihoodTable {
public:
    LikelihoodTable() = default;
    LikelihoodTable(std::initializer_list<std::pair<Event, double>> values) {
        for (const auto& [e, v] : values) set(e, LikelihoodEntry{v, 0.0, 0.0});
    }

    void set(const Event& event, LikelihoodEntry entry) { entries_[event] = entry; }

    double at(const Event& event) const {
        auto it = entries_.find(event);
        return it == entries_.end() ? 1.0 : it->second.value;
    }

    const std::map<Event, LikelihoodEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    friend bool operator==(const LikelihoodTable&, const LikelihoodTable&) = default;

private:
    std::map<Event, LikelihoodEntry> entries_;
};

}  // namespace stratx
