#include "baba/solver.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <unordered_set>

namespace baba {

namespace {

struct Groups {
  std::vector<Position> you;
  std::vector<Position> win;
  std::vector<Position> words;
  std::vector<Position> pushable;
};

Groups collect(const GameState& state) {
  Groups g;
  const LevelGrid& grid = state.grid;
  const RuleSet& rules = state.active_rules;
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      bool you = false, win = false, word = false, push = false;
      for (const Entity& e : grid.at({x, y})) {
        you |= rules.has(e.sprite, Property::You);
        win |= rules.has(e.sprite, Property::Win);
        word |= is_word(e.sprite);
        push |= is_word(e.sprite) || rules.has(e.sprite, Property::Push);
      }
      if (you) g.you.push_back({x, y});
      if (win) g.win.push_back({x, y});
      if (word) g.words.push_back({x, y});
      if (push) g.pushable.push_back({x, y});
    }
  }
  return g;
}

int nearest(const std::vector<Position>& from, const std::vector<Position>& to, int fallback) {
  if (from.empty() || to.empty()) return fallback;
  int best = std::numeric_limits<int>::max();
  for (Position a : from)
    for (Position b : to) best = std::min(best, manhattan(a, b));
  return best;
}

// Search tree node; the path is recovered by walking parents.
struct TreeNode {
  std::size_t parent = 0;
  Action action = Action::Wait;
  int depth = 0;
};

struct QueueEntry {
  double h = 0;
  int depth = 0;
  std::size_t serial = 0;  // index into the tree, increasing with insertion
  std::string signature;
};

struct WorseFirst {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.h != b.h) return a.h > b.h;
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.serial > b.serial;
  }
};

std::vector<Action> path_to(const std::vector<TreeNode>& tree, std::size_t node) {
  std::vector<Action> actions;
  while (node != 0) {
    actions.push_back(tree[node].action);
    node = tree[node].parent;
  }
  std::reverse(actions.begin(), actions.end());
  return actions;
}

Solution finish(const LevelGrid& grid, std::vector<Action> actions, int expansions) {
  const ReplayOutcome check = replay(grid, actions);
  Solution s;
  s.actions = std::move(actions);
  s.start_flags = check.start_flags;
  s.end_flags = check.end_flags;
  s.expansions = expansions;
  return s;
}

}  // namespace

double heuristic(const GameState& state) {
  const int fallback = state.grid.width() + state.grid.height();
  const Groups g = collect(state);
  const int n = nearest(g.you, g.win, fallback);
  const int w = nearest(g.you, g.words, fallback);
  const int p = nearest(g.you, g.pushable, fallback);
  return static_cast<double>(n + w + p) / 3.0;
}

SolveResult solve(const LevelGrid& grid, SolverBudget budget) {
  require_level_bounds(grid);
  const int limit = std::clamp(budget.max_expansions, 0, kDefaultMaxExpansions);
  SolveResult result;
  const GameState start = start_state(grid);
  if (start.status == Status::Won) {
    result.solution = finish(grid, {}, 0);
    return result;
  }

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, WorseFirst> frontier;
  std::unordered_set<std::string> seen;
  std::vector<TreeNode> tree{TreeNode{}};

  std::string root = state_signature(start);
  seen.insert(root);
  frontier.push(QueueEntry{heuristic(start), 0, 0, std::move(root)});

  while (!frontier.empty() && result.expansions < limit) {
    const QueueEntry entry = frontier.top();
    frontier.pop();
    ++result.expansions;
    const GameState state = state_from_signature(entry.signature, entry.depth);

    for (Action a : kAllActions) {
      GameState child = step(state, a);
      std::string sig = state_signature(child);
      if (!seen.insert(sig).second) continue;
      tree.push_back(TreeNode{entry.serial, a, entry.depth + 1});
      const std::size_t id = tree.size() - 1;
      if (child.status == Status::Won) {
        result.solution = finish(grid, path_to(tree, id), result.expansions);
        return result;
      }
      frontier.push(QueueEntry{heuristic(child), entry.depth + 1, id, std::move(sig)});
    }
  }
  result.exhausted_space = frontier.empty();
  return result;
}

}  // namespace baba
