#include "stratx/agents.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <queue>

#include "stratx/errors.hpp"

namespace stratx {

namespace {

bool contains(std::span<const Action> actions, Action a) {
    return std::find(actions.begin(), actions.end(), a) != actions.end();
}

bool has_pos(const std::vector<Pos>& v, Pos p) { return std::find(v.begin(), v.end(), p) != v.end(); }

// First move of a shortest path from `from` to the nearest cell satisfying
// `is_target`, entering only cells where `can_enter` holds. BFS expands moves
// in up/down/left/right order, which fixes tie-breaking.
template <typename Target, typename Enter>
std::optional<Action> step_toward(const Grid& grid, Pos from, std::span<const Action> valid,
                                  Target is_target, Enter can_enter) {
    std::vector<int> origin(grid.cell_count(), -1);
    std::queue<Pos> frontier;
    origin[grid.index(from)] = static_cast<int>(kActionCount);
    for (Action a : kMoves) {
        if (!contains(valid, a)) continue;
        const Pos q = neighbour(from, a);
        if (origin[grid.index(q)] != -1 || !can_enter(q)) continue;
        origin[grid.index(q)] = static_cast<int>(a);
        if (is_target(q)) return a;
        frontier.push(q);
    }
    while (!frontier.empty()) {
        const Pos p = frontier.front();
        frontier.pop();
        const int first = origin[grid.index(p)];
        for (Action a : kMoves) {
            const Pos q = neighbour(p, a);
            if (grid.is_wall(q) || origin[grid.index(q)] != -1 || !can_enter(q)) continue;
            origin[grid.index(q)] = first;
            if (is_target(q)) return static_cast<Action>(first);
            frontier.push(q);
        }
    }
    return std::nullopt;
}

// Move that keeps the player farthest (Manhattan) from every threat.
std::optional<Action> evade(Pos player, std::span<const Action> valid, const std::vector<Pos>& threats) {
    std::optional<Action> best;
    int best_d = -1;
    for (Action a : valid) {
        if (a == Action::drop_dynamite) continue;
        const Pos next = neighbour(player, a);
        int d = std::numeric_limits<int>::max();
        for (Pos t : threats) d = std::min(d, manhattan(t, next));
        if (d > best_d) {
            best_d = d;
            best = a;
        }
    }
    return best;
}

std::vector<char> danger_mask(const Grid& grid, const std::vector<Pos>& threats) {
    std::vector<char> mask(grid.cell_count(), 0);
    for (Pos t : threats) {
        mask[grid.index(t)] = 1;
        for (Action a : kMoves) {
            const Pos q = neighbour(t, a);
            if (grid.in_bounds(q)) mask[grid.index(q)] = 1;
        }
    }
    return mask;
}

std::optional<Action> pacman_move(const Game& game, const GameState& s, std::span<const Action> valid) {
    const Grid& grid = game.grid();
    auto ghost_at = [&](Pos p) { return has_pos(s.ghosts, p); };

    if (s.power_window > 0 && !s.ghosts.empty()) {
        if (auto a = step_toward(grid, s.player, valid, ghost_at, [](Pos) { return true; })) return a;
    }

    const auto danger = danger_mask(grid, s.ghosts);
    auto seek = [&](Item item) -> std::optional<Action> {
        auto is_target = [&](Pos p) { return s.item_at(grid, p) == item && !ghost_at(p); };
        auto safe = [&](Pos p) { return !danger[grid.index(p)] || (item == Item::power_up && is_target(p)); };
        if (auto a = step_toward(grid, s.player, valid, is_target, safe)) return a;
        return step_toward(grid, s.player, valid, is_target, [&](Pos p) { return !ghost_at(p); });
    };
    if (s.count(Item::power_up) > 0) {
        if (auto a = seek(Item::power_up)) return a;
    }
    if (auto a = seek(Item::dot)) return a;
    return evade(s.player, valid, s.ghosts);
}

std::optional<Action> dungeon_move(const Game& game, const GameState& s, std::span<const Action> valid) {
    const Grid& grid = game.grid();
    auto monster_at = [&](Pos p) { return has_pos(s.monsters, p); };
    const bool armed = !s.weapons.empty();

    if (armed) {
        for (Action a : kMoves) {
            if (contains(valid, a) && monster_at(neighbour(s.player, a))) return a;
        }
    }
    auto passable = [&](Pos p) { return s.item_at(grid, p) != Item::door || s.has_key; };
    auto seek = [&](auto is_target) -> std::optional<Action> {
        if (armed) return step_toward(grid, s.player, valid, is_target, passable);
        const auto danger = danger_mask(grid, s.monsters);
        if (auto a = step_toward(grid, s.player, valid, is_target,
                                 [&](Pos p) { return passable(p) && !danger[grid.index(p)]; })) {
            return a;
        }
        return step_toward(grid, s.player, valid, is_target,
                           [&](Pos p) { return passable(p) && !monster_at(p); });
    };

    std::optional<Action> a;
    if (!armed) {
        a = seek([&](Pos p) {
            const Item it = s.item_at(grid, p);
            return it == Item::gun || it == Item::sword;
        });
    }
    if (!a && !s.has_key) a = seek([&](Pos p) { return s.item_at(grid, p) == Item::key; });
    if (!a && s.has_key) a = seek([&](Pos p) { return s.item_at(grid, p) == Item::door; });
    if (!a && !s.monsters.empty() && !armed) a = evade(s.player, valid, s.monsters);
    return a;
}

std::optional<Action> bank_heist_move(const Game& game, const GameState& s, std::span<const Action> valid,
                                      const ScriptedParams& params) {
    const Grid& grid = game.grid();
    auto blast_risk = [&](Pos p) {
        return std::any_of(s.dynamite.begin(), s.dynamite.end(),
                           [p](const Dynamite& d) { return manhattan(d.pos, p) <= 1; });
    };

    if (blast_risk(s.player)) {
        std::vector<Pos> charges;
        for (const auto& d : s.dynamite) charges.push_back(d.pos);
        // Prefer a move that leaves every blast zone and avoids police contact.
        for (Action a : valid) {
            if (a == Action::drop_dynamite) continue;
            const Pos next = neighbour(s.player, a);
            if (!blast_risk(next) && !has_pos(s.police, next)) return a;
        }
        if (auto a = evade(s.player, valid, charges)) return a;
    }

    int nearest_police = std::numeric_limits<int>::max();
    for (Pos p : s.police) nearest_police = std::min(nearest_police, manhattan(p, s.player));
    if (nearest_police <= params.police_alert_distance && s.dynamite.empty() &&
        contains(valid, Action::drop_dynamite)) {
        return Action::drop_dynamite;
    }

    const auto danger = danger_mask(grid, s.police);
    auto seek = [&](Item item) -> std::optional<Action> {
        auto is_target = [&](Pos p) { return s.item_at(grid, p) == item; };
        if (auto a = step_toward(grid, s.player, valid, is_target,
                                 [&](Pos p) { return !danger[grid.index(p)] && !blast_risk(p); })) {
            return a;
        }
        return step_toward(grid, s.player, valid, is_target,
                           [&](Pos p) { return !has_pos(s.police, p) && !blast_risk(p); });
    };
    std::optional<Action> a;
    if (s.fuel < params.fuel_threshold) a = seek(Item::fuel);
    if (!a) a = seek(Item::bank);
    if (!a && !s.police.empty()) a = evade(s.player, valid, s.police);
    return a;
}

Action random_choice(std::span<const Action> valid, Rng& rng) { return valid[uniform_index(rng, valid.size())]; }

Action greedy(const std::array<double, kActionCount>& q, std::span<const Action> valid, Rng& rng) {
    double best = -std::numeric_limits<double>::infinity();
    for (Action a : valid) best = std::max(best, q[static_cast<std::size_t>(a)]);
    std::vector<Action> ties;
    for (Action a : valid) {
        if (q[static_cast<std::size_t>(a)] == best) ties.push_back(a);
    }
    return random_choice(ties, rng);
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::random: return "random";
        case PolicyKind::scripted_greedy: return "scripted-greedy";
        case PolicyKind::tabular: return "tabular-learned";
    }
    return "?";
}

PolicyKind parse_policy_kind(std::string_view text) {
    if (text == "random") return PolicyKind::random;
    if (text == "scripted-greedy" || text == "scripted" || text == "greedy") return PolicyKind::scripted_greedy;
    if (text == "tabular-learned" || text == "tabular") return PolicyKind::tabular;
    throw ConfigError("unknown policy kind '" + std::string(text) + "'");
}

std::uint64_t observation_key(const Observation& obs) {
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : obs) {
        const auto bits = std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffU;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

Action select_action(const Policy& policy, const AgentView& view, std::span<const Action> valid, Rng& rng) {
    if (valid.empty()) throw ActionError("select_action called with an empty valid-action set");
    switch (policy.kind) {
        case PolicyKind::random:
            return random_choice(valid, rng);
        case PolicyKind::scripted_greedy: {
            std::optional<Action> a;
            switch (view.game.id()) {
                case EnvId::pacman: a = pacman_move(view.game, view.state, valid); break;
                case EnvId::dungeon_crawler: a = dungeon_move(view.game, view.state, valid); break;
                case EnvId::bank_heist: a = bank_heist_move(view.game, view.state, valid, policy.scripted); break;
            }
            return (a && contains(valid, *a)) ? *a : random_choice(valid, rng);
        }
        case PolicyKind::tabular: {
            if (policy.table) {
                const auto it = policy.table->values.find(observation_key(view.game.observe(view.state)));
                if (it != policy.table->values.end()) return greedy(it->second, valid, rng);
            }
            return random_choice(valid, rng);
        }
    }
    return random_choice(valid, rng);
}

TrainingResult train_tabular(const Game& game, int episodes, const LearningParams& params) {
    if (episodes < 1) throw ConfigError("train_tabular needs at least one episode");
    auto table = std::make_shared<QTable>();
    TrainingResult result;
    result.episode_rewards.reserve(static_cast<std::size_t>(episodes));
    Rng rng(derive_seed(params.seed, 0x7261696eULL, 0));

    for (int ep = 0; ep < episodes; ++ep) {
        GameState state = game.reset(derive_seed(params.seed, 0x657069ULL, static_cast<std::uint64_t>(ep)));
        std::uint64_t key = observation_key(game.observe(state));
        double total = 0.0;
        while (!state.done) {
            const auto valid = game.valid_actions(state);
            auto& q = table->values[key];
            const Action a = bernoulli(rng, params.epsilon) ? random_choice(valid, rng) : greedy(q, valid, rng);
            const StepResult r = game.step(state, a);
            total += r.reward;
            const std::uint64_t next_key = observation_key(game.observe(state));
            double future = 0.0;
            if (!state.done) {
                const auto& next_q = table->values[next_key];
                future = -std::numeric_limits<double>::infinity();
                for (Action b : game.valid_actions(state)) future = std::max(future, next_q[static_cast<std::size_t>(b)]);
            }
            auto& cell = table->values[key][static_cast<std::size_t>(a)];
            cell += params.learning_rate * (r.reward + params.discount * future - cell);
            key = next_key;
        }
        result.episode_rewards.push_back(total);
    }
    result.policy = Policy::tabular(std::move(table));
    return result;
}

EpisodeSummary play_episode(const Game& game, const Policy& policy, std::uint64_t episode_seed) {
    EpisodeSummary out;
    GameState state = game.reset(episode_seed);
    Rng rng(agent_seed(episode_seed));
    while (!state.done) {
        const auto valid = game.valid_actions(state);
        const Action a = select_action(policy, AgentView{game, state}, valid, rng);
        out.steps.push_back(game.step(state, a));
        out.total_reward += out.steps.back().reward;
    }
    return out;
}

}  // namespace stratx
