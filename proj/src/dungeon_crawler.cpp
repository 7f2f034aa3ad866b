#include <algorithm>

#include "games_internal.hpp"
#include "stratx/errors.hpp"

namespace stratx::detail {

namespace {

class DungeonCrawler final : public Game {
public:
    explicit DungeonCrawler(GameConfig config) : Game(std::move(config)) {
        if (config_.monsters < 0 || config_.guns < 0 || config_.swords < 0) {
            throw ConfigError("dungeon entity counts must be non-negative");
        }
        std::size_t free = 0;
        for (std::size_t i = 0; i < grid_.cell_count(); ++i) {
            if (!grid_.is_wall(grid_.pos(i)) && initial_items_[i] == Item::none) ++free;
        }
        const auto needed = static_cast<std::size_t>(config_.monsters + config_.guns + config_.swords + 2);
        if (free < needed) throw ConfigError("dungeon map too small for its entities");
    }

    GameState reset(std::uint64_t episode_seed) const override {
        GameState s = base_state(episode_seed);
        auto place = [&](Item item) { s.items[grid_.index(*random_empty_cell(s, s.rng))] = item; };
        if (s.count(Item::door) == 0) place(Item::door);
        place(Item::key);
        for (int i = 0; i < config_.guns; ++i) place(Item::gun);
        for (int i = 0; i < config_.swords; ++i) place(Item::sword);
        for (int i = 0; i < config_.monsters; ++i) s.monsters.push_back(*random_empty_cell(s, s.rng));
        return s;
    }

    /// [gun, sword, monster, key, door] shortest-path distances (kUnreachable when
    /// absent or blocked), then guns held, swords held, key held.
    Observation observe(const GameState& s) const override {
        const auto dist = bfs_distances(grid_, s.player);
        auto nearest = [&](auto matches) {
            int best = kUnreachable;
            for (std::size_t i = 0; i < dist.size(); ++i) {
                if (dist[i] == kUnreachable || !matches(i)) continue;
                if (best == kUnreachable || dist[i] < best) best = dist[i];
            }
            return static_cast<double>(best);
        };
        auto item_is = [&](Item it) { return [&s, it](std::size_t i) { return s.items[i] == it; }; };
        auto monster_at = [&](std::size_t i) {
            const Pos p = grid_.pos(i);
            return std::find(s.monsters.begin(), s.monsters.end(), p) != s.monsters.end();
        };
        const auto held = [&](Item w) {
            return static_cast<double>(std::count(s.weapons.begin(), s.weapons.end(), w));
        };
        return {nearest(item_is(Item::gun)), nearest(item_is(Item::sword)), nearest(monster_at),
                nearest(item_is(Item::key)), nearest(item_is(Item::door)),  held(Item::gun),
                held(Item::sword),           s.has_key ? 1.0 : 0.0};
    }

    std::string render_text(const GameState& s) const override {
        std::string out;
        for (int r = 0; r < grid_.rows(); ++r) {
            for (int c = 0; c < grid_.cols(); ++c) {
                const Pos p{r, c};
                char g = ' ';
                if (grid_.is_wall(p)) g = 'X';
                else if (s.player == p) g = 'o';
                else if (std::find(s.monsters.begin(), s.monsters.end(), p) != s.monsters.end()) g = 'Z';
                else {
                    switch (s.item_at(grid_, p)) {
                        case Item::door: g = '|'; break;
                        case Item::key: g = 'k'; break;
                        case Item::gun: g = 'g'; break;
                        case Item::sword: g = 's'; break;
                        default: break;
                    }
                }
                out += g;
            }
            out += '\n';
        }
        return out;
    }

protected:
    bool passable(const GameState& s, Pos p) const override {
        if (grid_.is_wall(p)) return false;
        return s.item_at(grid_, p) != Item::door || s.has_key;
    }

    StepResult apply(GameState& s, Action action) const override {
        bool killed = false, unlocked = false, got_key = false;
        Item got_weapon = Item::none;
        double reward = 0.0;

        s.player = neighbour(s.player, action);
        Item& cell = s.items[grid_.index(s.player)];
        if (cell == Item::door) {
            unlocked = true;
            reward += config_.reward("unlock door");
            s.done = true;
        } else {
            fight(s, killed, reward);
            if (!s.player_dead) {
                if (cell == Item::gun || cell == Item::sword) {
                    got_weapon = cell;
                    s.weapons.push_back(cell);
                    reward += config_.reward("collect weapon");
                    cell = Item::none;
                } else if (cell == Item::key) {
                    got_key = true;
                    s.has_key = true;
                    reward += config_.reward("collect key");
                    cell = Item::none;
                }
            }
            if (!s.player_dead) {
                for (Pos& m : s.monsters) {
                    auto next = random_move(grid_, m, s.rng,
                                            [&](Pos q) { return s.item_at(grid_, q) != Item::door; });
                    if (next) m = *next;
                }
                fight(s, killed, reward);
            }
            if (s.player_dead) s.done = true;
        }

        const char* label = unlocked                   ? "unlock door"
                            : killed                   ? "kill a monster"
                            : got_key                  ? "collect key"
                            : got_weapon == Item::gun   ? "collect weapon (gun)"
                            : got_weapon == Item::sword ? "collect weapon (sword)"
                                                        : "move";
        return StepResult{event(label), reward, s.done};
    }

private:
    // Each monster sharing the player's cell costs one weapon, or the player's life.
    void fight(GameState& s, bool& killed, double& reward) const {
        for (auto it = s.monsters.begin(); it != s.monsters.end();) {
            if (*it != s.player) {
                ++it;
                continue;
            }
            if (s.weapons.empty()) {
                s.player_dead = true;
                return;
            }
            s.weapons.pop_front();
            reward += config_.reward("kill a monster");
            killed = true;
            it = s.monsters.erase(it);
        }
    }
};

}  // namespace

std::unique_ptr<Game> make_dungeon_crawler(GameConfig config) {
    return std::make_unique<DungeonCrawler>(std::move(config));
}

}  // namespace stratx::detail
