#include "baba/engine.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>

#include "baba/error.hpp"

namespace baba {

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Playing: return "playing";
    case Status::Won: return "won";
    case Status::NoYou: return "no_you";
  }
  return "?";
}

namespace {

bool governed(const RuleSet& rules, const Entity& e, Property p) { return rules.has(e.sprite, p); }

bool pushable(const RuleSet& rules, const Entity& e) {
  return is_word(e.sprite) || governed(rules, e, Property::Push);
}

/// Clears the way into `target` by pushing its pushable contents one cell
/// further along `d`. All-or-nothing: nothing moves unless the whole chain can.
bool clear_way(LevelGrid& grid, const RuleSet& rules, Position target, Direction d) {
  if (!grid.in_bounds(target)) return false;
  bool has_pushable = false;
  for (const Entity& e : grid.at(target)) {
    if (pushable(rules, e)) {
      has_pushable = true;
    } else if (governed(rules, e, Property::Stop)) {
      return false;
    }
  }
  if (!has_pushable) return true;

  const Position next = step_towards(target, d);
  if (!clear_way(grid, rules, next, d)) return false;

  Stack& from = grid.at(target);
  Stack& to = grid.at(next);
  auto split = std::stable_partition(from.begin(), from.end(),
                                     [&](const Entity& e) { return !pushable(rules, e); });
  to.insert(to.end(), split, from.end());
  from.erase(split, from.end());
  return true;
}

/// Moves the entity `uid` from `from` one cell along `d` if the way clears.
bool try_move(LevelGrid& grid, const RuleSet& rules, Position from, std::uint32_t uid,
              Direction d) {
  const Position target = step_towards(from, d);
  if (!clear_way(grid, rules, target, d)) return false;
  Stack& src = grid.at(from);
  auto it = std::find_if(src.begin(), src.end(), [&](const Entity& e) { return e.uid == uid; });
  Entity moved = *it;
  src.erase(it);
  grid.at(target).push_back(moved);
  return true;
}

std::optional<Position> locate(const LevelGrid& grid, std::uint32_t uid) {
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      for (const Entity& e : grid.at({x, y})) {
        if (e.uid == uid) return Position{x, y};
      }
    }
  }
  return std::nullopt;
}

Direction direction_of(Action a) {
  switch (a) {
    case Action::Up: return Direction::Up;
    case Action::Down: return Direction::Down;
    case Action::Left: return Direction::Left;
    default: return Direction::Right;
  }
}

void move_players(LevelGrid& grid, const RuleSet& rules, Direction d) {
  for (Position p : process_move_order(d, grid.width(), grid.height())) {
    std::vector<std::uint32_t> movers;
    for (const Entity& e : grid.at(p)) {
      if (governed(rules, e, Property::You)) movers.push_back(e.uid);
    }
    for (std::uint32_t uid : movers) {
      if (try_move(grid, rules, p, uid, d)) {
        for (Entity& e : grid.at(step_towards(p, d))) {
          if (e.uid == uid) e.facing = d;
        }
      }
    }
  }
}

void move_autonomous(LevelGrid& grid, const RuleSet& rules) {
  std::vector<std::uint32_t> movers;
  for (const Stack& stack : grid.cells()) {
    for (const Entity& e : stack) {
      if (governed(rules, e, Property::Move)) movers.push_back(e.uid);
    }
  }
  for (std::uint32_t uid : movers) {
    const std::optional<Position> p = locate(grid, uid);
    if (!p) continue;
    auto facing_of = [&]() -> Direction& {
      for (Entity& e : grid.at(*p)) {
        if (e.uid == uid) return e.facing;
      }
      throw std::logic_error("mover vanished");
    };
    const Direction d = facing_of();
    if (try_move(grid, rules, *p, uid, d)) continue;
    facing_of() = opposite(d);
    try_move(grid, rules, *p, uid, opposite(d));
  }
}

void apply_transformations(LevelGrid& grid, const RuleSet& rules) {
  if (rules.transformations().empty()) return;
  std::array<int, kObjectClassCount> target{};
  target.fill(-1);
  for (const Transformation& t : rules.transformations()) target[t.from_class] = t.to_class;
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      for (Entity& e : grid.at({x, y})) {
        if (is_object(e.sprite) && target[class_index(e.sprite)] >= 0) {
          e.sprite = object_from_class(target[class_index(e.sprite)]);
        }
      }
    }
  }
}

/// Removes every entity for which `doomed(stack, index)` holds, evaluated
/// against the unmodified stack.
template <typename Pred>
void destroy_where(LevelGrid& grid, Pred doomed) {
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      Stack& stack = grid.at({x, y});
      if (stack.empty()) continue;
      std::vector<bool> kill(stack.size());
      bool any = false;
      for (std::size_t i = 0; i < stack.size(); ++i) {
        kill[i] = doomed(stack, i);
        any |= kill[i];
      }
      if (!any) continue;
      Stack kept;
      for (std::size_t i = 0; i < stack.size(); ++i) {
        if (!kill[i]) kept.push_back(stack[i]);
      }
      stack = std::move(kept);
    }
  }
}

bool other_has(const RuleSet& rules, const Stack& stack, std::size_t self, Property p) {
  for (std::size_t j = 0; j < stack.size(); ++j) {
    if (j != self && governed(rules, stack[j], p)) return true;
  }
  return false;
}

void resolve_interactions(LevelGrid& grid, const RuleSet& rules) {
  destroy_where(grid, [&](const Stack& s, std::size_t) {
    if (s.size() < 2) return false;
    return std::any_of(s.begin(), s.end(),
                       [&](const Entity& e) { return governed(rules, e, Property::Sink); });
  });
  destroy_where(grid, [&](const Stack& s, std::size_t i) {
    return governed(rules, s[i], Property::You) && other_has(rules, s, i, Property::Kill);
  });
  destroy_where(grid, [&](const Stack& s, std::size_t i) {
    return governed(rules, s[i], Property::Melt) && other_has(rules, s, i, Property::Hot);
  });
}

Status classify(const LevelGrid& grid, const RuleSet& rules) {
  bool any_you = false;
  for (const Stack& stack : grid.cells()) {
    bool you = false;
    bool win = false;
    for (const Entity& e : stack) {
      you |= governed(rules, e, Property::You);
      win |= governed(rules, e, Property::Win);
    }
    if (you && win) return Status::Won;
    any_you |= you;
  }
  return any_you ? Status::Playing : Status::NoYou;
}

}  // namespace

GameState start_state(LevelGrid grid) {
  GameState state;
  state.active_rules = scan_rules(grid);
  state.status = classify(grid, state.active_rules);
  state.grid = std::move(grid);
  return state;
}

GameState step(const GameState& state, Action action) {
  if (state.status == Status::Won) {
    throw Error(ErrorCode::Conflict, "cannot step a state that is already won");
  }
  GameState next = state;
  LevelGrid& grid = next.grid;

  if (action != Action::Wait) move_players(grid, state.active_rules, direction_of(action));
  move_autonomous(grid, state.active_rules);

  const RuleSet rules = scan_rules(grid);
  apply_transformations(grid, rules);
  resolve_interactions(grid, rules);

  next.active_rules = scan_rules(grid);
  next.status = classify(grid, next.active_rules);
  next.turn = state.turn + 1;
  return next;
}

std::vector<Position> process_move_order(Direction direction, int width, int height) {
  std::vector<Position> order;
  order.reserve(static_cast<std::size_t>(width) * height);
  switch (direction) {
    case Direction::Right:
      for (int y = 0; y < height; ++y)
        for (int x = width - 1; x >= 0; --x) order.push_back({x, y});
      break;
    case Direction::Left:
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) order.push_back({x, y});
      break;
    case Direction::Down:
      for (int y = height - 1; y >= 0; --y)
        for (int x = 0; x < width; ++x) order.push_back({x, y});
      break;
    case Direction::Up:
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) order.push_back({x, y});
      break;
  }
  return order;
}

std::string state_signature(const GameState& state) {
  const LevelGrid& grid = state.grid;
  std::string sig;
  sig.reserve(static_cast<std::size_t>(grid.area()) + grid.entity_count() * 2 + 3);
  sig.push_back(static_cast<char>(grid.width()));
  sig.push_back(static_cast<char>(grid.height()));
  for (const Stack& stack : grid.cells()) {
    sig.push_back(static_cast<char>(stack.size()));
    for (const Entity& e : stack) {
      sig.push_back(static_cast<char>(e.sprite));
      sig.push_back(static_cast<char>(e.facing));
    }
  }
  sig.push_back(static_cast<char>(state.status));
  return sig;
}

GameState state_from_signature(std::string_view sig, int turn) {
  auto byte = [&](std::size_t i) {
    if (i >= sig.size()) throw Error(ErrorCode::InvalidLevel, "truncated state signature");
    return static_cast<unsigned char>(sig[i]);
  };
  std::size_t i = 0;
  const int width = byte(i++);
  const int height = byte(i++);
  LevelGrid grid(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int count = byte(i++);
      for (int k = 0; k < count; ++k) {
        const auto sprite = static_cast<Sprite>(byte(i++));
        const auto facing = static_cast<Direction>(byte(i++));
        grid.place({x, y}, sprite, facing);
      }
    }
  }
  GameState state;
  state.status = static_cast<Status>(byte(i++));
  state.active_rules = scan_rules(grid);
  state.grid = std::move(grid);
  state.turn = turn;
  return state;
}

ReplayOutcome replay(const LevelGrid& grid, std::span<const Action> actions) {
  if (grid.width() <= 0 || grid.height() <= 0 ||
      grid.cells().size() != static_cast<std::size_t>(grid.area())) {
    throw Error(ErrorCode::InvalidLevel, "malformed grid");
  }
  if (actions.size() > kMaxReplayActions) {
    throw Error(ErrorCode::InvalidLevel, "solution exceeds the replay budget of " +
                                             std::to_string(kMaxReplayActions) + " actions");
  }
  GameState state = start_state(grid);
  ReplayOutcome out;
  out.start_flags = rule_flags(state.active_rules);
  for (Action a : actions) {
    if (state.status == Status::Won) break;
    state = step(state, a);
    ++out.steps_used;
  }
  out.won = state.status == Status::Won;
  out.end_flags = rule_flags(state.active_rules);
  return out;
}

}  // namespace baba
