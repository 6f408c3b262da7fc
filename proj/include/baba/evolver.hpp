#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stop_token>
#include <vector>

#include "baba/grid.hpp"
#include "baba/random.hpp"

namespace baba {

inline constexpr int kPatternSide = 3;

/// Row-major topmost sprites of one 3x3 window.
using PatternKey = std::array<Sprite, kPatternSide * kPatternSide>;

struct PatternDistribution {
  std::map<PatternKey, long> counts;
  long total = 0;
};

/// Counts every fully-inside 3x3 window, (w-2)(h-2) of them. Stacks flatten
/// to their topmost sprite. Throws Error(InvalidLevel) below 3x3.
PatternDistribution extract_patterns(const LevelGrid& grid);

/// Symmetrised, epsilon-smoothed KL divergence over the union support:
/// 0.5*KL(p||q) + 0.5*KL(q||p) with p(x) = (c(x)+eps)/(total+eps*|U|).
double kl_divergence(const PatternDistribution& p, const PatternDistribution& q, double epsilon);

/// Share of object instances whose class noun appears nowhere in the grid.
double unnecessary_ratio(const LevelGrid& grid);

/// 1 when some X-IS-YOU rule is formed and a WIN word exists, else 0.
int playability_flag(const LevelGrid& grid);

/// Share of cells with an empty stack.
double emptiness_ratio(const LevelGrid& grid);

enum class InitMode { RandomMarginal, CopyReference, FromEditor };

std::string_view init_mode_name(InitMode m);
std::optional<InitMode> parse_init_mode(std::string_view name);

struct EvolverParams {
  double epsilon = 1e-6;
  /// Expected number of resampled cells per offspring; at least 1.
  double mutation_rate = 2.0;
  double pattern_paste_prob = 0.3;
  int max_iterations = 100;
  std::optional<double> target_fitness;
  InitMode init_mode = InitMode::RandomMarginal;
};

/// Throws Error(InvalidLevel) on out-of-range parameters.
void validate(const EvolverParams& params);

/// Reference levels with their pattern distributions, single-tile marginal
/// and pooled windows, computed once.
class ReferenceSet {
 public:
  /// Throws Error(InvalidLevel) if `levels` is empty or any is below 3x3.
  explicit ReferenceSet(std::vector<LevelGrid> levels);

  const std::vector<LevelGrid>& levels() const { return levels_; }
  const std::vector<PatternDistribution>& distributions() const { return distributions_; }

  Sprite sample_tile(Rng& rng) const;
  const PatternKey& sample_window(Rng& rng) const;

 private:
  std::vector<LevelGrid> levels_;
  std::vector<PatternDistribution> distributions_;
  std::vector<std::pair<Sprite, long>> marginal_;
  long marginal_total_ = 0;
  std::vector<PatternKey> windows_;
};

/// min over references of KL + u + (1 - p) + 0.1 * s. Lower is better.
double fitness(const LevelGrid& candidate, const ReferenceSet& references,
               const EvolverParams& params);
double fitness(const LevelGrid& candidate, std::span<const LevelGrid> references,
               const EvolverParams& params);

/// Resamples 1 + Poisson(rate - 1) distinct cells from the reference marginal
/// and, with the paste probability, stamps one reference window at a uniform
/// in-bounds anchor.
LevelGrid mutate(const LevelGrid& grid, const ReferenceSet& references,
                 const EvolverParams& params, Rng& rng);

struct Individual {
  LevelGrid grid;
  double fitness = 0;
};

struct EvolverState {
  std::array<Individual, 2> population;
  std::shared_ptr<const ReferenceSet> references;
  int iteration = 0;
  std::uint64_t seed = 0;
  Rng rng;
  bool paused = false;
  /// Best fitness after each generation; entry 0 is the initial population.
  std::vector<double> trace;

  const Individual& best() const {
    return population[1].fitness < population[0].fitness ? population[1] : population[0];
  }
};

struct EvolverInit {
  std::vector<LevelGrid> references;
  std::uint64_t seed = 0;
  /// Required for InitMode::FromEditor.
  std::optional<LevelGrid> editor_grid;
  /// Size of random-marginal parents; 0 takes the first reference's size.
  int width = 0;
  int height = 0;
};

EvolverState init_evolver(EvolverInit init, const EvolverParams& params);

/// One 2+2 generation: each parent yields one offspring, the two lowest
/// fitness of the four survive, parents winning ties. Throws Error(Conflict)
/// when paused.
EvolverState evolve_step(const EvolverState& state, const EvolverParams& params);

/// Steps until max_iterations, the target fitness, a pause, or a stop request.
EvolverState run(EvolverState state, const EvolverParams& params, std::stop_token stop = {});

}  // namespace baba
