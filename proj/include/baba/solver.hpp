#pragma once

#include <optional>
#include <vector>

#include "baba/engine.hpp"

namespace baba {

inline constexpr int kDefaultMaxExpansions = 10000;

struct SolverBudget {
  int max_expansions = kDefaultMaxExpansions;
};

/// Best-first distance heuristic: the mean of the shortest Manhattan distances
/// from any YOU instance to (a) a WIN instance, (b) a word sprite and (c) a
/// pushable entity. An empty target group counts as width+height; with no YOU
/// instance every term takes that fallback.
double heuristic(const GameState& state);

struct Solution {
  std::vector<Action> actions;
  RuleFlags start_flags;
  RuleFlags end_flags;
  int expansions = 0;
};

struct SolveResult {
  std::optional<Solution> solution;
  int expansions = 0;
  /// True when the frontier ran dry before the budget did: no reachable win.
  bool exhausted_space = false;

  bool solved() const { return solution.has_value(); }
};

/// Best-first search ordered by (h, depth, insertion serial) with duplicate
/// states pruned by signature. Expansions are counted when a node is popped
/// and never exceed the budget, which is itself capped at 10000. Unsolved is
/// a normal result, not an error. Throws Error(InvalidLevel) for grids
/// outside the level size bounds.
SolveResult solve(const LevelGrid& grid, SolverBudget budget = {});

}  // namespace baba
