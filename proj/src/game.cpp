#include "stratx/game.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <queue>

#include <json.hpp>

#include "games_internal.hpp"
#include "stratx/errors.hpp"

namespace stratx {

namespace {

// 10 x 6, three ghosts, two power-ups.
const std::vector<std::string> kPacmanLayout{
    "##########",
    "#O..M...O#",
    "#.##..##.#",
    "#...C..M.#",
    "#.M.....##",
    "##########",
};

const std::vector<std::string> kDungeonLayout{
    "XXXXXXXXXXXXXXX",
    "Xo    X       X",
    "X XXX X XXXXX X",
    "X   X   X     X",
    "XXX X XXX XXX X",
    "X     X     X|X",
    "X XXXXX XXX X X",
    "X       X     X",
    "XXXXXXXXXXXXXXX",
};

const std::vector<std::string> kBankHeistLayout{
    "############",
    "#C         #",
    "# ## ## ## #",
    "#          #",
    "# ## ## ## #",
    "#    B     #",
    "# ## ## ## #",
    "#         F#",
    "############",
};

char wall_glyph(EnvId env) { return env == EnvId::dungeon_crawler ? 'X' : '#'; }
char start_glyph(EnvId env) { return env == EnvId::dungeon_crawler ? 'o' : 'C'; }

}  // namespace

Grid::Grid(int rows, int cols, std::vector<char> walls)
    : rows_(rows), cols_(cols), walls_(std::move(walls)) {}

std::vector<int> bfs_distances(const Grid& grid, Pos from, const std::vector<char>* blocked) {
    std::vector<int> dist(grid.cell_count(), kUnreachable);
    if (grid.is_wall(from)) return dist;
    std::queue<Pos> frontier;
    dist[grid.index(from)] = 0;
    frontier.push(from);
    while (!frontier.empty()) {
        const Pos p = frontier.front();
        frontier.pop();
        const int d = dist[grid.index(p)];
        for (Action a : kMoves) {
            const Pos q = neighbour(p, a);
            if (grid.is_wall(q)) continue;
            const std::size_t qi = grid.index(q);
            if (dist[qi] != kUnreachable) continue;
            if (blocked && (*blocked)[qi]) continue;
            dist[qi] = d + 1;
            frontier.push(q);
        }
    }
    return dist;
}

double GameConfig::reward(const std::string& kind) const {
    auto it = rewards.find(kind);
    return it == rewards.end() ? 0.0 : it->second;
}

GameConfig default_config(EnvId env) {
    GameConfig c;
    c.env = env;
    switch (env) {
        case EnvId::pacman:
            c.layout = kPacmanLayout;
            c.rewards = {{"collect dot", 10.0}, {"collect power-up", 50.0}, {"kill a ghost", 200.0}};
            break;
        case EnvId::dungeon_crawler:
            c.layout = kDungeonLayout;
            c.rewards = {{"collect weapon", 25.0},
                         {"collect key", 25.0},
                         {"kill a monster", 50.0},
                         {"unlock door", 100.0}};
            break;
        case EnvId::bank_heist:
            c.layout = kBankHeistLayout;
            c.rewards = {{"rob bank", 50.0}, {"destroy police car", 50.0}, {"collect fuel", 20.0}};
            break;
    }
    return c;
}

int GameState::count(Item item) const {
    return static_cast<int>(std::count(items.begin(), items.end(), item));
}

Game::Game(GameConfig config) : config_(std::move(config)) {
    const auto& layout = config_.layout;
    if (layout.empty() || layout.front().empty()) throw ConfigError("empty map layout");
    const int rows = static_cast<int>(layout.size());
    const int cols = static_cast<int>(layout.front().size());
    if (rows < 3 || cols < 3) throw ConfigError("map layout must be at least 3 x 3");
    if (config_.max_steps < 1) throw ConfigError("max-steps-per-episode must be positive");

    const char wall = wall_glyph(config_.env);
    const char start = start_glyph(config_.env);
    std::vector<char> walls(static_cast<std::size_t>(rows * cols), 0);
    initial_items_.assign(walls.size(), Item::none);
    int starts = 0;

    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(layout[r].size()) != cols) {
            throw ConfigError("map layout is not rectangular (row " + std::to_string(r) + ")");
        }
        for (int c = 0; c < cols; ++c) {
            const char g = layout[r][c];
            const std::size_t i = static_cast<std::size_t>(r * cols + c);
            const bool boundary = r == 0 || c == 0 || r == rows - 1 || c == cols - 1;
            if (boundary && g != wall) {
                throw ConfigError("map boundary must be wall at row " + std::to_string(r) + ", col " +
                                  std::to_string(c));
            }
            if (g == wall) {
                walls[i] = 1;
                continue;
            }
            if (g == start) {
                start_ = {r, c};
                ++starts;
                continue;
            }
            if (g == ' ') continue;
            switch (config_.env) {
                case EnvId::pacman:
                    if (g == '.') initial_items_[i] = Item::dot;
                    else if (g == 'O') initial_items_[i] = Item::power_up;
                    else if (g == 'M') layout_ghosts_.push_back({r, c});
                    else throw ConfigError(std::string("unknown pacman glyph '") + g + "'");
                    break;
                case EnvId::dungeon_crawler:
                    if (g == '|') initial_items_[i] = Item::door;
                    else throw ConfigError(std::string("unknown dungeon glyph '") + g + "'");
                    break;
                case EnvId::bank_heist:
                    if (g == 'B') initial_items_[i] = Item::bank;
                    else if (g == 'F') initial_items_[i] = Item::fuel;
                    else throw ConfigError(std::string("unknown bank heist glyph '") + g + "'");
                    break;
            }
        }
    }
    if (starts != 1) throw ConfigError("map needs exactly one player start");
    grid_ = Grid(rows, cols, std::move(walls));
}

GameState Game::base_state(std::uint64_t episode_seed) const {
    GameState s;
    s.player = start_;
    s.items = initial_items_;
    s.fuel = config_.fuel_capacity;
    s.rng.seed(derive_seed(config_.rng_seed, 0x656e76ULL, episode_seed));
    return s;
}

bool Game::occupied(const GameState& state, Pos p) const {
    if (state.player == p) return true;
    if (state.items[grid_.index(p)] != Item::none) return true;
    auto has = [p](const std::vector<Pos>& v) { return std::find(v.begin(), v.end(), p) != v.end(); };
    return has(state.ghosts) || has(state.monsters) || has(state.police);
}

std::optional<Pos> Game::random_empty_cell(const GameState& state, Rng& rng, int min_player_distance) const {
    std::vector<Pos> free;
    for (std::size_t i = 0; i < grid_.cell_count(); ++i) {
        const Pos p = grid_.pos(i);
        if (grid_.is_wall(p) || occupied(state, p)) continue;
        if (manhattan(p, state.player) < min_player_distance) continue;
        free.push_back(p);
    }
    if (free.empty()) return std::nullopt;
    return free[uniform_index(rng, free.size())];
}

bool Game::passable(const GameState&, Pos p) const { return !grid_.is_wall(p); }

std::vector<Action> Game::valid_actions(const GameState& state) const {
    std::vector<Action> out;
    if (state.done) return out;
    for (Action a : kMoves) {
        if (passable(state, neighbour(state.player, a))) out.push_back(a);
    }
    return out;
}

StepResult Game::step(GameState& state, Action action) const {
    if (state.done) throw ActionError("step on a finished episode");
    const auto valid = valid_actions(state);
    if (std::find(valid.begin(), valid.end(), action) == valid.end()) {
        throw ActionError("action '" + std::string(to_string(action)) + "' is masked in this state");
    }
    StepResult result = apply(state, action);
    ++state.steps;
    state.score += result.reward;
    if (state.steps >= config_.max_steps) state.done = true;
    result.done = state.done;
    return result;
}

std::unique_ptr<Game> make_game(GameConfig config) {
    switch (config.env) {
        case EnvId::pacman: return detail::make_pacman(std::move(config));
        case EnvId::dungeon_crawler: return detail::make_dungeon_crawler(std::move(config));
        case EnvId::bank_heist: return detail::make_bank_heist(std::move(config));
    }
    throw ConfigError("unknown environment");
}

std::unique_ptr<Game> make_game(EnvId env) { return make_game(default_config(env)); }

std::vector<std::string> load_layout(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open map file '" + path + "'");
    std::vector<std::string> rows;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(line);
    }
    return rows;
}

GameConfig load_game_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open env config '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("env config '" + path + "': " + e.what());
    }
    try {
        GameConfig c = default_config(parse_env_id(doc.at("env").get<std::string>()));
        if (doc.contains("map")) {
            std::filesystem::path map = doc["map"].get<std::string>();
            if (map.is_relative()) map = std::filesystem::path(path).parent_path() / map;
            c.layout = load_layout(map.string());
        } else if (doc.contains("layout")) {
            c.layout = doc["layout"].get<std::vector<std::string>>();
        }
        if (doc.contains("rewards")) {
            for (auto& [k, v] : doc["rewards"].items()) c.rewards[k] = v.get<double>();
        }
        c.ghosts = doc.value("ghosts", c.ghosts);
        c.monsters = doc.value("monsters", c.monsters);
        c.guns = doc.value("guns", c.guns);
        c.swords = doc.value("swords", c.swords);
        c.max_steps = doc.value("max_steps", c.max_steps);
        c.rng_seed = doc.value("rng_seed", c.rng_seed);
        c.power_window = doc.value("power_window", c.power_window);
        c.ghost_respawn = doc.value("ghost_respawn", c.ghost_respawn);
        c.fuel_capacity = doc.value("fuel_capacity", c.fuel_capacity);
        c.move_fuel_cost = doc.value("move_fuel_cost", c.move_fuel_cost);
        c.dynamite_fuel_cost = doc.value("dynamite_fuel_cost", c.dynamite_fuel_cost);
        c.dynamite_fuse = doc.value("dynamite_fuse", c.dynamite_fuse);
        c.banks_to_win = doc.value("banks_to_win", c.banks_to_win);
        c.police_chase_probability = doc.value("police_chase_probability", c.police_chase_probability);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("env config '" + path + "': " + e.what());
    }
}

}  // namespace stratx
