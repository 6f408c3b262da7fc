#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "baba/grid.hpp"
#include "baba/rules.hpp"

namespace baba {

enum class Action : std::uint8_t { Up, Down, Left, Right, Wait };

inline constexpr std::array<Action, 5> kAllActions = {Action::Up, Action::Down, Action::Left,
                                                      Action::Right, Action::Wait};

enum class Status : std::uint8_t { Playing, Won, NoYou };

std::string_view status_name(Status s);

struct GameState {
  LevelGrid grid;
  RuleSet active_rules;
  int turn = 0;
  Status status = Status::Playing;
};

/// Scans the initial rules and classifies the starting status (a level can
/// be won before any input).
GameState start_state(LevelGrid grid);

/// One turn: YOU movement, MOVE movement, rescan, transformations,
/// interactions (SINK, KILL, HOT/MELT), final rescan and status.
/// Throws Error(Conflict) if the state is already Won. NoYou states may still
/// be stepped since MOVE objects can re-form a YOU rule.
GameState step(const GameState& state, Action action);

/// Cell visit order for a movement phase: opposite to the direction of travel
/// so the leading mover in a line always goes first.
std::vector<Position> process_move_order(Direction direction, int width, int height);

/// Canonical byte encoding of the observable state: dimensions, every stack
/// (sprite and facing) and the status. Identity uids are excluded.
std::string state_signature(const GameState& state);

/// Rebuilds a state from its signature. Rules are rescanned; the turn counter
/// is not part of the signature and is set to `turn`.
GameState state_from_signature(std::string_view signature, int turn = 0);

inline constexpr std::size_t kMaxReplayActions = 1000;

struct ReplayOutcome {
  bool won = false;
  RuleFlags start_flags;
  RuleFlags end_flags;
  int steps_used = 0;
};

/// Re-simulates `actions` from the initial grid. end_flags come from the rule
/// scan of the winning state (or the final state when not won). Actions past
/// the win are ignored.
ReplayOutcome replay(const LevelGrid& grid, std::span<const Action> actions);

}  // namespace baba
