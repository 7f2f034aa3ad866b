#pragma once

#include <memory>

#include "stratx/game.hpp"

namespace stratx::detail {

std::unique_ptr<Game> make_pacman(GameConfig config);
std::unique_ptr<Game> make_dungeon_crawler(GameConfig config);
std::unique_ptr<Game> make_bank_heist(GameConfig config);

/// Uniformly random move among the moves whose target satisfies `ok`; nullopt if none.
template <typename Pred>
std::optional<Pos> random_move(const Grid& grid, Pos from, Rng& rng, Pred ok) {
    Pos options[4];
    std::size_t n = 0;
    for (Action a : kMoves) {
        const Pos next = neighbour(from, a);
        if (!grid.is_wall(next) && ok(next)) options[n++] = next;
    }
    if (n == 0) return std::nullopt;
    return options[uniform_index(rng, n)];
}

}  // namespace stratx::detail
