#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "baba/rules.hpp"

namespace baba {

inline constexpr int kCellKeyBits = 2 * kRuleFlagCount;
inline constexpr std::uint32_t kCellCount = 1u << kCellKeyBits;

/// Archive coordinate: bits 0-8 are the rule flags at the start of the level,
/// bits 9-17 the flags in the winning state.
struct CellKey {
  std::uint32_t value = 0;

  RuleFlags start_flags() const { return RuleFlags::from_uint(value & 0x1FFu); }
  RuleFlags end_flags() const { return RuleFlags::from_uint(value >> kRuleFlagCount); }
  int popcount() const { return std::popcount(value); }

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

CellKey behavior_key(const RuleFlags& start, const RuleFlags& end);

using LevelId = std::uint64_t;

enum class Provenance { User, Evolver, Mixed };

std::string_view provenance_name(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view name);

/// One level's share of a rating event.
struct RatingScore {
  std::size_t event = 0;
  int score = 0;

  friend bool operator==(const RatingScore&, const RatingScore&) = default;
};

struct LevelRecord {
  LevelId id = 0;
  std::string author;
  std::string grid_text;
  std::string solution;
  RuleFlags start_flags;
  RuleFlags end_flags;
  CellKey cell;
  std::vector<RatingScore> ratings;
  long rating_sum = 0;
  int rating_count = 0;
  std::int64_t created_at = 0;
  Provenance provenance = Provenance::User;

  double average_rating() const {
    return rating_count == 0 ? 0.0 : static_cast<double>(rating_sum) / rating_count;
  }

  friend bool operator==(const LevelRecord&, const LevelRecord&) = default;
};

struct Cell {
  CellKey key;
  std::vector<LevelId> rated;
  std::optional<LevelId> elite;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Forced-choice comparison of two levels on hardness and design.
struct RatingEvent {
  LevelId level_a = 0;
  LevelId level_b = 0;
  LevelId harder_winner = 0;
  LevelId design_winner = 0;
  std::string rater;
  std::int64_t timestamp = 0;

  friend bool operator==(const RatingEvent&, const RatingEvent&) = default;
};

inline constexpr int kEliteMinRatings = 5;

/// Score a level earns from one event: 1, plus 2 per category won.
int event_score(const RatingEvent& event, LevelId level);

/// avg >= 3.5 over at least five ratings, compared exactly on integers.
bool elite_eligible(const LevelRecord& record);

struct ArchiveSnapshot {
  static constexpr int kFormatVersion = 1;

  int version = kFormatVersion;
  LevelId next_id = 1;
  std::vector<LevelRecord> records;
  std::vector<Cell> cells;
  std::vector<RatingEvent> events;
  std::vector<std::string> seed_corpus;

  friend bool operator==(const ArchiveSnapshot&, const ArchiveSnapshot&) = default;
};

/// Throws Error(InvalidLevel) naming the first broken invariant: record cell
/// keys, dangling ids, rating sums, elite eligibility and membership.
void check_integrity(const ArchiveSnapshot& snapshot);

struct Submission {
  std::string grid_text;
  std::string solution;
  std::string author;
  Provenance provenance = Provenance::User;
  std::optional<std::int64_t> created_at;
};

/// Per-bit constraint on cell keys plus whether unpopulated cells qualify.
struct CellFilter {
  std::uint32_t must_set = 0;
  std::uint32_t must_clear = 0;
  bool include_unpopulated = false;

  bool matches(CellKey key) const {
    return (key.value & must_set) == must_set && (key.value & must_clear) == 0;
  }
};

/// Parses "s2=1,e3=0": s/e selects start/end flags, then the flag index and
/// the required value. Empty text is the unconstrained filter.
CellFilter parse_cell_filter(std::string_view text);

enum class CellSort { Simplicity, Random };

struct CellSummary {
  CellKey key;
  std::size_t rated_count = 0;
  std::optional<LevelId> elite;
};

inline constexpr int kDefaultSampleCount = 50;

struct GoalSpec {
  CellKey key;
  /// "X-IS-PUSH (start)", "X,Y-IS-YOU (win)", ...
  std::vector<std::string> goals;

  std::string text() const;
};

GoalSpec goal_for(CellKey key);

struct ArchiveStats {
  std::size_t populated_cells = 0;
  std::size_t records = 0;
  std::size_t elites = 0;
  std::array<std::size_t, 3> by_provenance{};
  /// Records with each flag set, start flags then end flags.
  std::array<std::size_t, kCellKeyBits> rule_histogram{};
  std::size_t total_activations = 0;
};

struct VerifyFailure {
  LevelId id = 0;
  std::string reason;
};

struct EliteChange {
  std::optional<LevelId> before;
  std::optional<LevelId> after;
};

/// Level repository structured as a MAP-Elites grid over 2^18 cells. Each
/// cell keeps a rated table of every verified level and at most one elite.
/// Mutations are serialised behind a single writer lock; reads share it.
class Archive {
 public:
  using CommitHook = std::function<void(const ArchiveSnapshot&)>;

  Archive() = default;
  /// Throws Error(InvalidLevel) if the snapshot fails check_integrity.
  explicit Archive(ArchiveSnapshot snapshot);

  Archive(const Archive&) = delete;
  Archive& operator=(const Archive&) = delete;

  /// Called with the new state, under the writer lock, after each mutation.
  /// An exception from the hook rolls the mutation back and propagates.
  void on_commit(CommitHook hook);

  ArchiveSnapshot snapshot() const;

  /// Replays the solution and files the level under the resulting cell.
  /// Throws Error with InvalidLevel (bad grid or solution), Unverified (does
  /// not win) or Conflict (same grid text already in that cell).
  LevelRecord submit(const Submission& submission);

  /// Throws NotFound for unknown ids and Conflict for self-comparison or
  /// winners outside the pair. Returns both updated records.
  std::pair<LevelRecord, LevelRecord> record_rating(RatingEvent event);

  /// Re-evaluates the elite of `key`; nullopt when nothing changed.
  std::optional<EliteChange> promote_elite(CellKey key);

  std::vector<CellSummary> sample_cells(int count, const CellFilter& filter, CellSort sort,
                                        std::uint64_t seed) const;

  /// The k simplest unpopulated cells, fewest required rules first.
  std::vector<GoalSpec> suggest_goals(int k) const;

  /// Throws NotFound.
  LevelRecord level(LevelId id) const;
  /// Rated table of a populated cell; throws NotFound otherwise.
  std::vector<LevelRecord> cell_levels(CellKey key) const;
  std::optional<Cell> cell(CellKey key) const;
  std::vector<LevelRecord> elites() const;
  std::size_t size() const;

  /// Uniform pair of distinct rated levels from the whole population.
  std::optional<std::pair<LevelId, LevelId>> draw_rating_pair(std::uint64_t seed) const;

  ArchiveStats stats() const;
  /// Re-replays every stored solution; empty when all still win.
  std::vector<VerifyFailure> verify() const;

 private:
  struct State {
    LevelId next_id = 1;
    std::map<LevelId, LevelRecord> records;
    std::map<CellKey, Cell> cells;
    std::vector<RatingEvent> events;
    std::vector<std::string> seed_corpus;
  };

  static ArchiveSnapshot to_snapshot(const State& state);
  void commit(State next);
  static std::optional<EliteChange> reevaluate_elite(State& state, CellKey key);

  mutable std::shared_mutex mutex_;
  State state_;
  CommitHook hook_;
};

}  // namespace baba
