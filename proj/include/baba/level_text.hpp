#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "baba/engine.hpp"
#include "baba/grid.hpp"

namespace baba {

/// Level interchange format: one character per cell, rows separated by '\n'.
///
///   .            empty
///   b k f r w a s l g v t   baba keke flag rock wall water skull lava grass love floor
///   B K F R W A S L G V T   the matching noun words
///   1            IS
///   2 3 4 5 6 7 8 9 0       YOU WIN PUSH STOP MOVE KILL SINK HOT MELT
///
/// Canonical text terminates every row with '\n'.

char sprite_char(Sprite s);
std::optional<Sprite> sprite_from_char(char c);

/// Throws Error(InvalidLevel) with the row/column of the first ragged row or
/// unknown character. A single trailing newline is accepted.
LevelGrid decode_level(std::string_view text);

/// Throws Error(InvalidLevel) if any cell holds more than one entity; only
/// design-time grids are encodable.
std::string encode_level(const LevelGrid& grid);

/// Solutions are strings over U, D, L, R and W (wait).
char action_char(Action a);
std::string encode_solution(const std::vector<Action>& actions);
/// Throws Error(InvalidLevel) on any other character.
std::vector<Action> decode_solution(std::string_view text);

}  // namespace baba
