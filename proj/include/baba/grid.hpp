#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "baba/sprite.hpp"

namespace baba {

enum class Direction : std::uint8_t { Up, Down, Left, Right };

constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::Up: return Direction::Down;
    case Direction::Down: return Direction::Up;
    case Direction::Left: return Direction::Right;
    case Direction::Right: return Direction::Left;
  }
  return d;
}

struct Position {
  int x = 0;
  int y = 0;

  friend bool operator==(const Position&, const Position&) = default;
};

constexpr Position step_towards(Position p, Direction d) {
  switch (d) {
    case Direction::Up: return {p.x, p.y - 1};
    case Direction::Down: return {p.x, p.y + 1};
    case Direction::Left: return {p.x - 1, p.y};
    case Direction::Right: return {p.x + 1, p.y};
  }
  return p;
}

constexpr int manhattan(Position a, Position b) {
  const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx + dy;
}

/// One thing sitting in a cell: an object instance or a word sprite.
/// `uid` tracks identity across moves and transformations; it is not part of
/// the observable state and is ignored by equality.
struct Entity {
  Sprite sprite = Sprite::Empty;
  Direction facing = Direction::Right;
  std::uint32_t uid = 0;

  friend bool operator==(const Entity& a, const Entity& b) {
    return a.sprite == b.sprite && a.facing == b.facing;
  }
};

using Stack = std::vector<Entity>;

/// Rectangular grid of entity stacks. Row 0 is the top row. Stacks are
/// ordered by arrival; the last element is the topmost sprite.
class LevelGrid {
 public:
  LevelGrid() = default;
  LevelGrid(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  int area() const { return width_ * height_; }

  bool in_bounds(Position p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }

  const Stack& at(Position p) const { return cells_[index(p)]; }
  Stack& at(Position p) { return cells_[index(p)]; }

  /// Appends a new entity on top of the stack at `p`.
  void place(Position p, Sprite s, Direction facing = Direction::Right);
  void clear(Position p) { at(p).clear(); }
  /// Replaces the cell with a single sprite (or nothing for Empty).
  void set(Position p, Sprite s);

  /// Topmost sprite at `p`, Empty for an empty stack.
  Sprite top(Position p) const;

  std::span<const Stack> cells() const { return cells_; }

  std::size_t entity_count() const;
  std::uint32_t next_uid() const { return next_uid_; }

  /// Observable equality: dimensions and every stack (sprite and facing).
  friend bool operator==(const LevelGrid& a, const LevelGrid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.cells_ == b.cells_;
  }

 private:
  std::size_t index(Position p) const {
    return static_cast<std::size_t>(p.y) * width_ + p.x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Stack> cells_;
  std::uint32_t next_uid_ = 1;
};

inline constexpr int kMinLevelSide = 5;
inline constexpr int kMaxLevelSide = 20;

/// Throws Error(InvalidLevel) unless both sides are within the accepted level
/// bounds. Smaller grids are fine for pattern math and unit fixtures, but only
/// bounded levels are solved, stored or served.
void require_level_bounds(const LevelGrid& grid);

}  // namespace baba
