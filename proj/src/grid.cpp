#include "baba/grid.hpp"

#include <sstream>

#include "baba/error.hpp"

namespace baba {

LevelGrid::LevelGrid(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidLevel, "grid dimensions must be positive");
  }
  cells_.resize(static_cast<std::size_t>(width) * height);
}

void LevelGrid::place(Position p, Sprite s, Direction facing) {
  if (s == Sprite::Empty) return;
  at(p).push_back(Entity{s, facing, next_uid_++});
}

void LevelGrid::set(Position p, Sprite s) {
  clear(p);
  place(p, s);
}

Sprite LevelGrid::top(Position p) const {
  const Stack& stack = at(p);
  return stack.empty() ? Sprite::Empty : stack.back().sprite;
}

std::size_t LevelGrid::entity_count() const {
  std::size_t n = 0;
  for (const Stack& s : cells_) n += s.size();
  return n;
}

void require_level_bounds(const LevelGrid& grid) {
  auto ok = [](int side) { return side >= kMinLevelSide && side <= kMaxLevelSide; };
  if (!ok(grid.width()) || !ok(grid.height())) {
    std::ostringstream msg;
    msg << "level is " << grid.width() << "x" << grid.height() << ", sides must be within "
        << kMinLevelSide << ".." << kMaxLevelSide;
    throw Error(ErrorCode::InvalidLevel, msg.str());
  }
}

}  // namespace baba
