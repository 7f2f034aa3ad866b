#include <algorithm>

#include "games_internal.hpp"
#include "stratx/errors.hpp"

namespace stratx::detail {

namespace {

// Observation cell codes.
constexpr double kEmpty = 0, kWall = 1, kDot = 2, kPowerUp = 3, kGhost = 4, kPacman = 5;

class Pacman final : public Game {
public:
    explicit Pacman(GameConfig config) : Game(std::move(config)) {
        if (config_.ghosts < 0 || config_.ghosts > static_cast<int>(layout_ghosts_.size())) {
            throw ConfigError("pacman layout defines " + std::to_string(layout_ghosts_.size()) +
                              " ghost starts, config asks for " + std::to_string(config_.ghosts));
        }
        if (config_.power_window < 1) throw ConfigError("power-up window must be positive");
    }

    GameState reset(std::uint64_t episode_seed) const override {
        GameState s = base_state(episode_seed);
        s.ghosts.assign(layout_ghosts_.begin(), layout_ghosts_.begin() + config_.ghosts);
        return s;
    }

    Observation observe(const GameState& s) const override {
        Observation obs(grid_.cell_count(), kEmpty);
        for (std::size_t i = 0; i < obs.size(); ++i) {
            if (grid_.is_wall(grid_.pos(i))) obs[i] = kWall;
            else if (s.items[i] == Item::dot) obs[i] = kDot;
            else if (s.items[i] == Item::power_up) obs[i] = kPowerUp;
        }
        for (Pos g : s.ghosts) obs[grid_.index(g)] = kGhost;
        obs[grid_.index(s.player)] = kPacman;
        return obs;
    }

    std::string render_text(const GameState& s) const override {
        std::string out;
        for (int r = 0; r < grid_.rows(); ++r) {
            for (int c = 0; c < grid_.cols(); ++c) {
                const Pos p{r, c};
                char g = ' ';
                if (grid_.is_wall(p)) g = '#';
                else if (s.player == p) g = 'C';
                else if (std::find(s.ghosts.begin(), s.ghosts.end(), p) != s.ghosts.end()) g = 'M';
                else if (s.item_at(grid_, p) == Item::power_up) g = 'O';
                else if (s.item_at(grid_, p) == Item::dot) g = '.';
                out += g;
            }
            out += '\n';
        }
        return out;
    }

protected:
    StepResult apply(GameState& s, Action action) const override {
        const bool powered = s.power_window > 0;
        bool killed = false, collected_power = false, collected_dot = false;
        double reward = 0.0;

        s.player = neighbour(s.player, action);
        resolve_contacts(s, powered, killed, reward);

        if (!s.player_dead) {
            Item& item = s.items[grid_.index(s.player)];
            if (item == Item::dot) {
                collected_dot = true;
                reward += config_.reward("collect dot");
            } else if (item == Item::power_up) {
                collected_power = true;
                reward += config_.reward("collect power-up");
            }
            item = Item::none;
        }

        if (collected_power) {
            s.power_window = config_.power_window;
            s.kills_in_window = 0;
        } else if (s.power_window > 0) {
            --s.power_window;
        }

        if (!s.player_dead) {
            const bool frightened = s.power_window > 0;
            for (Pos& g : s.ghosts) {
                auto next = random_move(grid_, g, s.rng,
                                        [&](Pos q) { return !frightened || q != s.player; });
                if (next) g = *next;
            }
            resolve_contacts(s, frightened, killed, reward);
        }

        if (s.player_dead) s.done = true;
        if (s.count(Item::dot) == 0 && s.count(Item::power_up) == 0) s.done = true;

        const char* label = killed ? "kill a ghost"
                            : collected_power ? "collect power-up"
                            : collected_dot   ? "collect dot"
                                              : "move";
        return StepResult{event(label), reward, s.done};
    }

private:
    void resolve_contacts(GameState& s, bool powered, bool& killed, double& reward) const {
        auto hit = [&](Pos g) { return g == s.player; };
        if (std::none_of(s.ghosts.begin(), s.ghosts.end(), hit)) return;
        if (!powered) {
            s.player_dead = true;
            return;
        }
        std::size_t victims = 0;
        for (Pos g : s.ghosts) {
            if (!hit(g)) continue;
            reward += config_.reward("kill a ghost") * static_cast<double>(1 << s.kills_in_window);
            ++s.kills_in_window;
            ++victims;
        }
        std::erase_if(s.ghosts, hit);
        killed = true;
        if (config_.ghost_respawn) {
            for (std::size_t i = 0; i < victims; ++i) {
                s.ghosts.push_back(layout_ghosts_[uniform_index(s.rng, layout_ghosts_.size())]);
            }
        }
    }
};

}  // namespace

std::unique_ptr<Game> make_pacman(GameConfig config) { return std::make_unique<Pacman>(std::move(config)); }

}  // namespace stratx::detail
