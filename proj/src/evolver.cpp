#include "baba/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "baba/error.hpp"
#include "baba/rules.hpp"

namespace baba {

PatternDistribution extract_patterns(const LevelGrid& grid) {
  if (grid.width() < kPatternSide || grid.height() < kPatternSide) {
    throw Error(ErrorCode::InvalidLevel, "grid is smaller than the 3x3 pattern window");
  }
  PatternDistribution dist;
  for (int y = 0; y + kPatternSide <= grid.height(); ++y) {
    for (int x = 0; x + kPatternSide <= grid.width(); ++x) {
      PatternKey key{};
      for (int dy = 0; dy < kPatternSide; ++dy)
        for (int dx = 0; dx < kPatternSide; ++dx)
          key[dy * kPatternSide + dx] = grid.top({x + dx, y + dy});
      ++dist.counts[key];
      ++dist.total;
    }
  }
  return dist;
}

double kl_divergence(const PatternDistribution& p, const PatternDistribution& q, double epsilon) {
  if (p.total <= 0 || q.total <= 0) {
    throw Error(ErrorCode::InvalidLevel, "pattern distribution is empty");
  }
  if (!(epsilon > 0)) throw Error(ErrorCode::InvalidLevel, "epsilon must be positive");

  std::set<PatternKey> support;
  for (const auto& [k, _] : p.counts) support.insert(k);
  for (const auto& [k, _] : q.counts) support.insert(k);
  const double u = static_cast<double>(support.size());
  const double p_norm = static_cast<double>(p.total) + epsilon * u;
  const double q_norm = static_cast<double>(q.total) + epsilon * u;

  auto count = [](const PatternDistribution& d, const PatternKey& k) {
    const auto it = d.counts.find(k);
    return it == d.counts.end() ? 0.0 : static_cast<double>(it->second);
  };

  double forward = 0;
  double backward = 0;
  for (const PatternKey& k : support) {
    const double pk = (count(p, k) + epsilon) / p_norm;
    const double qk = (count(q, k) + epsilon) / q_norm;
    const double log_ratio = std::log(pk / qk);
    forward += pk * log_ratio;
    backward -= qk * log_ratio;
  }
  return 0.5 * forward + 0.5 * backward;
}

double unnecessary_ratio(const LevelGrid& grid) {
  std::array<bool, kObjectClassCount> has_noun{};
  long objects = 0;
  for (const Stack& stack : grid.cells()) {
    for (const Entity& e : stack) {
      if (is_noun(e.sprite)) has_noun[class_index(e.sprite)] = true;
      if (is_object(e.sprite)) ++objects;
    }
  }
  if (objects == 0) return 0.0;
  long orphaned = 0;
  for (const Stack& stack : grid.cells()) {
    for (const Entity& e : stack) {
      if (is_object(e.sprite) && !has_noun[class_index(e.sprite)]) ++orphaned;
    }
  }
  return static_cast<double>(orphaned) / static_cast<double>(objects);
}

int playability_flag(const LevelGrid& grid) {
  bool win_word = false;
  for (const Stack& stack : grid.cells()) {
    for (const Entity& e : stack) win_word |= e.sprite == Sprite::Win;
  }
  if (!win_word) return 0;
  const RuleSet rules = scan_rules(grid);
  for (const Rule& r : rules.rules()) {
    if (r.complement == Sprite::You) return 1;
  }
  return 0;
}

double emptiness_ratio(const LevelGrid& grid) {
  const auto empty = std::count_if(grid.cells().begin(), grid.cells().end(),
                                   [](const Stack& s) { return s.empty(); });
  return static_cast<double>(empty) / static_cast<double>(grid.area());
}

std::string_view init_mode_name(InitMode m) {
  switch (m) {
    case InitMode::RandomMarginal: return "random-marginal";
    case InitMode::CopyReference: return "copy-reference";
    case InitMode::FromEditor: return "from-editor";
  }
  return "?";
}

std::optional<InitMode> parse_init_mode(std::string_view name) {
  for (InitMode m : {InitMode::RandomMarginal, InitMode::CopyReference, InitMode::FromEditor}) {
    if (init_mode_name(m) == name) return m;
  }
  return std::nullopt;
}

void validate(const EvolverParams& params) {
  if (!(params.epsilon > 0)) throw Error(ErrorCode::InvalidLevel, "epsilon must be positive");
  if (!(params.mutation_rate >= 1)) {
    throw Error(ErrorCode::InvalidLevel, "mutation_rate must be at least 1");
  }
  if (!(params.pattern_paste_prob >= 0 && params.pattern_paste_prob <= 1)) {
    throw Error(ErrorCode::InvalidLevel, "pattern_paste_prob must be within [0,1]");
  }
  if (params.max_iterations < 0) {
    throw Error(ErrorCode::InvalidLevel, "max_iterations must be non-negative");
  }
}

ReferenceSet::ReferenceSet(std::vector<LevelGrid> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw Error(ErrorCode::InvalidLevel, "at least one reference is required");
  std::array<long, kSpriteCount> tiles{};
  for (const LevelGrid& level : levels_) {
    distributions_.push_back(extract_patterns(level));
    for (const auto& [key, n] : distributions_.back().counts) {
      windows_.insert(windows_.end(), static_cast<std::size_t>(n), key);
    }
    for (int y = 0; y < level.height(); ++y)
      for (int x = 0; x < level.width(); ++x) ++tiles[to_index(level.top({x, y}))];
  }
  for (Sprite s : all_sprites()) {
    if (tiles[to_index(s)] > 0) {
      marginal_.emplace_back(s, tiles[to_index(s)]);
      marginal_total_ += tiles[to_index(s)];
    }
  }
}

Sprite ReferenceSet::sample_tile(Rng& rng) const {
  auto r = static_cast<long>(rng.index(static_cast<std::uint64_t>(marginal_total_)));
  for (const auto& [sprite, n] : marginal_) {
    if (r < n) return sprite;
    r -= n;
  }
  return marginal_.back().first;
}

const PatternKey& ReferenceSet::sample_window(Rng& rng) const {
  return windows_[rng.index(windows_.size())];
}

double fitness(const LevelGrid& candidate, const ReferenceSet& references,
               const EvolverParams& params) {
  const PatternDistribution mine = extract_patterns(candidate);
  double best_kl = INFINITY;
  for (const PatternDistribution& ref : references.distributions()) {
    best_kl = std::min(best_kl, kl_divergence(ref, mine, params.epsilon));
  }
  return best_kl + unnecessary_ratio(candidate) + (1 - playability_flag(candidate)) +
         0.1 * emptiness_ratio(candidate);
}

double fitness(const LevelGrid& candidate, std::span<const LevelGrid> references,
               const EvolverParams& params) {
  return fitness(candidate, ReferenceSet({references.begin(), references.end()}), params);
}

LevelGrid mutate(const LevelGrid& grid, const ReferenceSet& references,
                 const EvolverParams& params, Rng& rng) {
  LevelGrid out = grid;
  const int area = out.area();
  const int m = std::min(area, 1 + rng.poisson(params.mutation_rate - 1));

  // Partial Fisher-Yates for m distinct cells.
  std::vector<int> cells(static_cast<std::size_t>(area));
  std::iota(cells.begin(), cells.end(), 0);
  for (int i = 0; i < m; ++i) {
    const auto j = i + static_cast<int>(rng.index(static_cast<std::uint64_t>(area - i)));
    std::swap(cells[i], cells[j]);
    const Position p{cells[i] % out.width(), cells[i] / out.width()};
    out.set(p, references.sample_tile(rng));
  }

  if (rng.bernoulli(params.pattern_paste_prob) && out.width() >= kPatternSide &&
      out.height() >= kPatternSide) {
    const PatternKey& window = references.sample_window(rng);
    const int ax = static_cast<int>(rng.index(static_cast<std::uint64_t>(out.width() - 2)));
    const int ay = static_cast<int>(rng.index(static_cast<std::uint64_t>(out.height() - 2)));
    for (int dy = 0; dy < kPatternSide; ++dy)
      for (int dx = 0; dx < kPatternSide; ++dx)
        out.set({ax + dx, ay + dy}, window[dy * kPatternSide + dx]);
  }
  return out;
}

EvolverState init_evolver(EvolverInit init, const EvolverParams& params) {
  validate(params);
  auto refs = std::make_shared<const ReferenceSet>(std::move(init.references));

  EvolverState state;
  state.references = refs;
  state.seed = init.seed;
  state.rng = Rng(init.seed);

  std::array<LevelGrid, 2> parents;
  switch (params.init_mode) {
    case InitMode::RandomMarginal: {
      const int w = init.width > 0 ? init.width : refs->levels().front().width();
      const int h = init.height > 0 ? init.height : refs->levels().front().height();
      for (LevelGrid& g : parents) {
        g = LevelGrid(w, h);
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) g.set({x, y}, refs->sample_tile(state.rng));
      }
      break;
    }
    case InitMode::CopyReference:
      for (std::size_t i = 0; i < parents.size(); ++i) {
        parents[i] = refs->levels()[i % refs->levels().size()];
      }
      break;
    case InitMode::FromEditor:
      if (!init.editor_grid) {
        throw Error(ErrorCode::InvalidLevel, "from-editor initialisation needs a grid");
      }
      parents.fill(*init.editor_grid);
      break;
  }
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const double f = fitness(parents[i], *refs, params);
    state.population[i] = Individual{std::move(parents[i]), f};
  }
  state.trace.push_back(state.best().fitness);
  return state;
}

EvolverState evolve_step(const EvolverState& state, const EvolverParams& params) {
  if (state.paused) throw Error(ErrorCode::Conflict, "evolution is paused");
  EvolverState next = state;
  std::vector<Individual> pool(next.population.begin(), next.population.end());
  for (const Individual& parent : state.population) {
    LevelGrid child = mutate(parent.grid, *next.references, params, next.rng);
    const double f = fitness(child, *next.references, params);
    pool.push_back(Individual{std::move(child), f});
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; });
  next.population = {std::move(pool[0]), std::move(pool[1])};
  ++next.iteration;
  next.trace.push_back(next.best().fitness);
  return next;
}

EvolverState run(EvolverState state, const EvolverParams& params, std::stop_token stop) {
  while (state.iteration < params.max_iterations && !state.paused && !stop.stop_requested()) {
    if (params.target_fitness && state.best().fitness <= *params.target_fitness) break;
    state = evolve_step(state, params);
  }
  return state;
}

}  // namespace baba
