#include <algorithm>

#include "games_internal.hpp"
#include "stratx/errors.hpp"

namespace stratx::detail {

namespace {

constexpr double kMaskedBenefit = -100.0;

bool in_blast(Pos centre, Pos p) { return manhattan(centre, p) <= 1; }

class BankHeist final : public Game {
public:
    explicit BankHeist(GameConfig config) : Game(std::move(config)) {
        if (config_.fuel_capacity < 1 || config_.move_fuel_cost < 0 || config_.dynamite_fuel_cost < 0) {
            throw ConfigError("bank heist fuel settings must be positive");
        }
        if (config_.dynamite_fuse < 1) throw ConfigError("dynamite fuse must be at least one step");
        if (config_.banks_to_win < 1) throw ConfigError("banks-to-win must be positive");
    }

    GameState reset(std::uint64_t episode_seed) const override {
        GameState s = base_state(episode_seed);
        if (s.count(Item::bank) == 0) s.items[grid_.index(*random_empty_cell(s, s.rng))] = Item::bank;
        if (s.count(Item::fuel) == 0) s.items[grid_.index(*random_empty_cell(s, s.rng))] = Item::fuel;
        return s;
    }

    std::vector<Action> valid_actions(const GameState& s) const override {
        std::vector<Action> out;
        if (s.done) return out;
        if (s.fuel >= config_.move_fuel_cost) out = Game::valid_actions(s);
        const bool armed_here = std::any_of(s.dynamite.begin(), s.dynamite.end(),
                                            [&](const Dynamite& d) { return d.pos == s.player; });
        if (s.fuel >= config_.dynamite_fuel_cost && !armed_here) out.push_back(Action::drop_dynamite);
        return out;
    }

    /// One heuristic benefit score per action id (up, down, left, right, drop
    /// dynamite); masked actions score kMaskedBenefit.
    Observation observe(const GameState& s) const override {
        Observation obs(kActionCount, kMaskedBenefit);
        if (s.done) return obs;
        const auto valid = valid_actions(s);
        const bool low_fuel = s.fuel < config_.fuel_capacity / 3;
        const auto bank_dist = distances_to(s, Item::bank);
        const auto fuel_dist = distances_to(s, Item::fuel);
        const int police_near = nearest_police(s, s.player);

        for (Action a : valid) {
            double score = 0.0;
            if (a == Action::drop_dynamite) {
                score = (police_near != kUnreachable && police_near <= 2) ? 3.0 : -1.0;
            } else {
                const Pos next = neighbour(s.player, a);
                const auto here = grid_.index(s.player), there = grid_.index(next);
                if (bank_dist[here] != kUnreachable && bank_dist[there] != kUnreachable) {
                    score += bank_dist[here] - bank_dist[there];
                }
                if (low_fuel && fuel_dist[here] != kUnreachable && fuel_dist[there] != kUnreachable) {
                    score += 2.0 * (fuel_dist[here] - fuel_dist[there]);
                }
                if (s.item_at(grid_, next) == Item::bank) score += 5.0;
                if (s.item_at(grid_, next) == Item::fuel) score += low_fuel ? 4.0 : 1.0;
                const int d = nearest_police(s, next);
                if (d != kUnreachable && d <= 1) score -= 10.0;
                for (const auto& dyn : s.dynamite) {
                    if (dyn.fuse <= 2 && in_blast(dyn.pos, next)) score -= 10.0;
                }
            }
            obs[static_cast<std::size_t>(a)] = score;
        }
        return obs;
    }

    std::string render_text(const GameState& s) const override {
        std::string out;
        for (int r = 0; r < grid_.rows(); ++r) {
            for (int c = 0; c < grid_.cols(); ++c) {
                const Pos p{r, c};
                char g = ' ';
                auto has = [p](const auto& v) { return std::find(v.begin(), v.end(), p) != v.end(); };
                if (grid_.is_wall(p)) g = '#';
                else if (s.player == p) g = 'C';
                else if (has(s.police)) g = 'P';
                else if (std::any_of(s.dynamite.begin(), s.dynamite.end(),
                                     [p](const Dynamite& d) { return d.pos == p; })) g = '*';
                else if (s.item_at(grid_, p) == Item::bank) g = 'B';
                else if (s.item_at(grid_, p) == Item::fuel) g = 'F';
                out += g;
            }
            out += '\n';
        }
        return out;
    }

protected:
    StepResult apply(GameState& s, Action action) const override {
        bool robbed = false, refuelled = false, dropped = false, destroyed = false;
        double reward = 0.0;
        auto caught = [&] {
            return std::find(s.police.begin(), s.police.end(), s.player) != s.police.end();
        };

        if (action == Action::drop_dynamite) {
            dropped = true;
            s.fuel = std::clamp(s.fuel - config_.dynamite_fuel_cost, 0, config_.fuel_capacity);
            s.dynamite.push_back({s.player, config_.dynamite_fuse + 1});  // ticks once this step
        } else {
            s.player = neighbour(s.player, action);
            int refill = 0;
            if (caught()) {
                s.player_dead = true;
            } else {
                Item& cell = s.items[grid_.index(s.player)];
                if (cell == Item::bank) {
                    robbed = true;
                    cell = Item::none;
                    ++s.banks_robbed;
                    reward += config_.reward("rob bank") * s.banks_robbed;
                    if (s.banks_robbed < config_.banks_to_win) {
                        if (auto p = random_empty_cell(s, s.rng)) s.items[grid_.index(*p)] = Item::bank;
                    }
                    if (auto p = random_empty_cell(s, s.rng, 3)) s.police.push_back(*p);
                } else if (cell == Item::fuel) {
                    refuelled = true;
                    cell = Item::none;
                    refill = config_.fuel_capacity;
                    reward += config_.reward("collect fuel");
                    if (auto p = random_empty_cell(s, s.rng)) s.items[grid_.index(*p)] = Item::fuel;
                }
            }
            s.fuel = std::clamp(s.fuel - config_.move_fuel_cost + refill, 0, config_.fuel_capacity);
        }

        if (!s.player_dead) {
            move_police(s);
            if (caught()) s.player_dead = true;
        }

        for (auto& d : s.dynamite) --d.fuse;
        for (const auto& d : s.dynamite) {
            if (d.fuse > 0) continue;
            const auto before = s.police.size();
            std::erase_if(s.police, [&](Pos p) { return in_blast(d.pos, p); });
            const auto hits = before - s.police.size();
            if (hits > 0) {
                destroyed = true;
                reward += config_.reward("destroy police car") * static_cast<double>(hits);
            }
            if (in_blast(d.pos, s.player)) s.player_dead = true;
        }
        std::erase_if(s.dynamite, [](const Dynamite& d) { return d.fuse <= 0; });

        if (s.player_dead || s.banks_robbed >= config_.banks_to_win || s.fuel <= 0) s.done = true;

        const char* label = destroyed   ? "destroy police car"
                            : robbed    ? "rob bank"
                            : refuelled ? "collect fuel"
                            : dropped   ? "drop dynamite"
                                        : "move";
        return StepResult{event(label), reward, s.done};
    }

private:
    std::vector<int> distances_to(const GameState& s, Item target) const {
        // Multi-source BFS from every target cell, so each cell holds its distance to the nearest one.
        std::vector<int> best(grid_.cell_count(), kUnreachable);
        for (std::size_t i = 0; i < grid_.cell_count(); ++i) {
            if (s.items[i] != target) continue;
            const auto d = bfs_distances(grid_, grid_.pos(i));
            for (std::size_t j = 0; j < d.size(); ++j) {
                if (d[j] != kUnreachable && (best[j] == kUnreachable || d[j] < best[j])) best[j] = d[j];
            }
        }
        return best;
    }

    int nearest_police(const GameState& s, Pos from) const {
        int best = kUnreachable;
        for (Pos p : s.police) {
            const int d = manhattan(p, from);
            if (best == kUnreachable || d < best) best = d;
        }
        return best;
    }

    void move_police(GameState& s) const {
        if (s.police.empty()) return;
        const auto to_player = bfs_distances(grid_, s.player);
        for (Pos& p : s.police) {
            if (bernoulli(s.rng, config_.police_chase_probability)) {
                Pos best = p;
                int best_d = to_player[grid_.index(p)];
                for (Action a : kMoves) {
                    const Pos q = neighbour(p, a);
                    if (grid_.is_wall(q)) continue;
                    const int d = to_player[grid_.index(q)];
                    if (d != kUnreachable && (best_d == kUnreachable || d < best_d)) {
                        best = q;
                        best_d = d;
                    }
                }
                p = best;
            } else if (auto next = random_move(grid_, p, s.rng, [](Pos) { return true; })) {
                p = *next;
            }
        }
    }
};

}  // namespace

std::unique_ptr<Game> make_bank_heist(GameConfig config) {
    return std::make_unique<BankHeist>(std::move(config));
}

}  // namespace stratx::detail
