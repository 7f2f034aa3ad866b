#pragma once

// Seedable symbolic grid games behind one interface. A GameState owns its
// environment RNG, so (config, episode seed, action sequence) fully
// determines an episode.

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stratx/rng.hpp"
#include "stratx/trajectory.hpp"

namespace stratx {

struct Pos {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const Pos&, const Pos&) = default;
};

inline Pos neighbour(Pos p, Action a) {
    switch (a) {
        case Action::up: return {p.row - 1, p.col};
        case Action::down: return {p.row + 1, p.col};
        case Action::left: return {p.row, p.col - 1};
        case Action::right: return {p.row, p.col + 1};
        case Action::drop_dynamite: return p;
    }
    return p;
}

inline constexpr Action kMoves[] = {Action::up, Action::down, Action::left, Action::right};

inline int manhattan(Pos a, Pos b) {
    return (a.row > b.row ? a.row - b.row : b.row - a.row) +
           (a.col > b.col ? a.col - b.col : b.col - a.col);
}

enum class Item : std::uint8_t { none, dot, power_up, gun, sword, key, door, bank, fuel };

class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, std::vector<char> walls);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t cell_count() const noexcept { return walls_.size(); }
    bool in_bounds(Pos p) const noexcept {
        return p.row >= 0 && p.col >= 0 && p.row < rows_ && p.col < cols_;
    }
    bool is_wall(Pos p) const noexcept { return !in_bounds(p) || walls_[index(p)] != 0; }
    std::size_t index(Pos p) const noexcept {
        return static_cast<std::size_t>(p.row) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(p.col);
    }
    Pos pos(std::size_t index) const noexcept {
        return {static_cast<int>(index / static_cast<std::size_t>(cols_)),
                static_cast<int>(index % static_cast<std::size_t>(cols_))};
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<char> walls_;
};

/// Distance reported for entities the player cannot reach.
inline constexpr int kUnreachable = -1;

/// Breadth-first distances from `from` over non-wall cells; kUnreachable elsewhere.
/// `blocked` (optional, indexed by cell) marks additional impassable cells.
std::vector<int> bfs_distances(const Grid& grid, Pos from, const std::vector<char>* blocked = nullptr);

struct Dynamite {
    Pos pos;
    int fuse = 0;
};

struct GameConfig {
    EnvId env = EnvId::pacman;
    /// One string per row, using the environment's glyphs.
    std::vector<std::string> layout;
    /// Points per reward kind; keys documented in docs/schemas.md.
    std::map<std::string, double> rewards;
    int ghosts = 3;
    int monsters = 6;
    int guns = 3;
    int swords = 3;
    int max_steps = 500;
    std::uint64_t rng_seed = 0;

    int power_window = 5;
    bool ghost_respawn = false;

    int fuel_capacity = 100;
    int move_fuel_cost = 1;
    int dynamite_fuel_cost = 5;
    int dynamite_fuse = 3;
    int banks_to_win = 5;
    double police_chase_probability = 0.5;

    double reward(const std::string& kind) const;
};

/// Built-in default configuration (map, rewards, entity counts) per environment.
GameConfig default_config(EnvId env);

struct GameState {
    Pos player;
    std::vector<Item> items;  // indexed by grid cell
    std::vector<Pos> ghosts;
    std::vector<Pos> monsters;
    std::vector<Pos> police;
    std::vector<Dynamite> dynamite;

    int power_window = 0;
    int kills_in_window = 0;
    int fuel = 100;
    std::deque<Item> weapons;  // consumed front-first
    bool has_key = false;
    int banks_robbed = 0;
    double score = 0.0;
    int steps = 0;
    bool done = false;
    bool player_dead = false;

    Rng rng;

    Item item_at(const Grid& grid, Pos p) const { return items[grid.index(p)]; }
    int count(Item item) const;
};

struct StepResult {
    Event event;
    double reward = 0.0;
    bool done = false;
};

class Game {
public:
    /// Validates the config (rectangular grid, wall boundary, empty start). Throws ConfigError.
    explicit Game(GameConfig config);
    virtual ~Game() = default;

    Game(const Game&) = delete;
    Game& operator=(const Game&) = delete;

    EnvId id() const noexcept { return config_.env; }
    const GameConfig& config() const noexcept { return config_; }
    const Grid& grid() const noexcept { return grid_; }
    Pos start() const noexcept { return start_; }
    std::span<const std::string_view> vocabulary() const { return event_vocabulary(id()); }

    virtual GameState reset(std::uint64_t episode_seed) const = 0;

    /// Advances `state` in place. Throws ActionError if `action` is not valid.
    StepResult step(GameState& state, Action action) const;

    /// Move actions not blocked by walls (plus environment extras); empty once done.
    virtual std::vector<Action> valid_actions(const GameState& state) const;
    virtual Observation observe(const GameState& state) const = 0;
    virtual std::string render_text(const GameState& state) const = 0;

protected:
    virtual StepResult apply(GameState& state, Action action) const = 0;
    virtual bool passable(const GameState& state, Pos p) const;

    GameState base_state(std::uint64_t episode_seed) const;
    Event event(std::string_view label) const { return Event{id(), std::string(label)}; }
    /// Uniformly random empty cell that is not the player's and not in `exclude`.
    std::optional<Pos> random_empty_cell(const GameState& state, Rng& rng, int min_player_distance = 0) const;
    bool occupied(const GameState& state, Pos p) const;

    GameConfig config_;
    Grid grid_;
    Pos start_;
    std::vector<Item> initial_items_;
    std::vector<Pos> layout_ghosts_;
};

std::unique_ptr<Game> make_game(GameConfig config);
std::unique_ptr<Game> make_game(EnvId env);

/// Loads a map file (one row per line) into `config.layout`.
std::vector<std::string> load_layout(const std::string& path);
/// Reads a JSON env config; a relative "map" entry is resolved against the config's directory.
GameConfig load_game_config(const std::string& path);

}  // namespace stratx
