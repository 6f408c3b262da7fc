#include "baba/archive.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <numeric>
#include <set>

#include "baba/engine.hpp"
#include "baba/error.hpp"
#include "baba/level_text.hpp"
#include "baba/random.hpp"

namespace baba {

CellKey behavior_key(const RuleFlags& start, const RuleFlags& end) {
  return CellKey{start.to_uint() | (end.to_uint() << kRuleFlagCount)};
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::User: return "user";
    case Provenance::Evolver: return "evolver";
    case Provenance::Mixed: return "mixed";
  }
  return "?";
}

std::optional<Provenance> parse_provenance(std::string_view name) {
  for (Provenance p : {Provenance::User, Provenance::Evolver, Provenance::Mixed}) {
    if (provenance_name(p) == name) return p;
  }
  return std::nullopt;
}

int event_score(const RatingEvent& event, LevelId level) {
  return 1 + 2 * (event.harder_winner == level) + 2 * (event.design_winner == level);
}

bool elite_eligible(const LevelRecord& r) {
  return r.rating_count >= kEliteMinRatings && 2 * r.rating_sum >= 7L * r.rating_count;
}

namespace {

/// a.avg > b.avg without floating point.
bool higher_average(const LevelRecord& a, const LevelRecord& b) {
  return a.rating_sum * b.rating_count > b.rating_sum * a.rating_count;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::InvalidLevel, "archive integrity: " + what);
}

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

/// Every key ordered by (popcount, value).
const std::vector<std::uint32_t>& keys_by_simplicity() {
  static const std::vector<std::uint32_t> order = [] {
    std::vector<std::uint32_t> keys(kCellCount);
    std::iota(keys.begin(), keys.end(), 0u);
    std::stable_sort(keys.begin(), keys.end(), [](std::uint32_t a, std::uint32_t b) {
      return std::popcount(a) < std::popcount(b);
    });
    return keys;
  }();
  return order;
}

}  // namespace

void check_integrity(const ArchiveSnapshot& s) {
  if (s.version != ArchiveSnapshot::kFormatVersion) {
    corrupt("unsupported format version " + std::to_string(s.version));
  }
  std::map<LevelId, const LevelRecord*> records;
  for (const LevelRecord& r : s.records) {
    const std::string tag = "record " + std::to_string(r.id);
    if (!records.emplace(r.id, &r).second) corrupt(tag + " is duplicated");
    if (r.id >= s.next_id) corrupt(tag + " is not below next_id");
    if (r.cell != behavior_key(r.start_flags, r.end_flags)) {
      corrupt(tag + " cell does not match its rule flags");
    }
    if (r.rating_count != static_cast<int>(r.ratings.size())) {
      corrupt(tag + " rating_count disagrees with its rating list");
    }
    long sum = 0;
    for (const RatingScore& rs : r.ratings) {
      if (rs.event >= s.events.size()) corrupt(tag + " references a missing rating event");
      const RatingEvent& ev = s.events[rs.event];
      if (ev.level_a != r.id && ev.level_b != r.id) {
        corrupt(tag + " lists a rating event it is not part of");
      }
      if (rs.score != event_score(ev, r.id)) corrupt(tag + " has a rating score mismatch");
      sum += rs.score;
    }
    if (sum != r.rating_sum) corrupt(tag + " rating_sum disagrees with its ratings");
  }

  std::set<LevelId> filed;
  std::set<CellKey> keys;
  for (const Cell& c : s.cells) {
    const std::string tag = "cell " + std::to_string(c.key.value);
    if (c.key.value >= kCellCount) corrupt(tag + " is outside the key space");
    if (!keys.insert(c.key).second) corrupt(tag + " is duplicated");
    if (c.rated.empty()) corrupt(tag + " has an empty rated table");
    for (LevelId id : c.rated) {
      const auto it = records.find(id);
      if (it == records.end()) corrupt(tag + " lists unknown level " + std::to_string(id));
      if (it->second->cell != c.key) corrupt(tag + " lists level " + std::to_string(id) +
                                             " filed under another cell");
      if (!filed.insert(id).second) corrupt("level " + std::to_string(id) + " filed twice");
    }
    if (c.elite) {
      if (std::find(c.rated.begin(), c.rated.end(), *c.elite) == c.rated.end()) {
        corrupt(tag + " elite is not in its rated table");
      }
      if (!elite_eligible(*records.at(*c.elite))) corrupt(tag + " elite is below threshold");
    }
  }
  if (filed.size() != records.size()) corrupt("a record is not filed in any cell");

  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const RatingEvent& ev = s.events[i];
    const std::string tag = "rating event " + std::to_string(i);
    if (!records.count(ev.level_a) || !records.count(ev.level_b)) {
      corrupt(tag + " references an unknown level");
    }
    if (ev.level_a == ev.level_b) corrupt(tag + " compares a level with itself");
    for (LevelId w : {ev.harder_winner, ev.design_winner}) {
      if (w != ev.level_a && w != ev.level_b) corrupt(tag + " has a winner outside the pair");
    }
  }
}

CellFilter parse_cell_filter(std::string_view text) {
  CellFilter f;
  while (!text.empty()) {
    const auto comma = text.find(',');
    std::string_view term = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (term.empty()) continue;

    const auto eq = term.find('=');
    const std::string_view lhs = term.substr(0, eq);
    const std::string_view rhs = eq == std::string_view::npos ? "1" : term.substr(eq + 1);
    int index = -1;
    if (lhs.size() >= 2 && (lhs[0] == 's' || lhs[0] == 'e')) {
      try {
        std::size_t used = 0;
        index = std::stoi(std::string(lhs.substr(1)), &used);
        if (used != lhs.size() - 1) index = -1;
      } catch (const std::exception&) {
        index = -1;
      }
    }
    if (index < 0 || index >= kRuleFlagCount || (rhs != "0" && rhs != "1")) {
      throw Error(ErrorCode::InvalidLevel, "bad filter term '" + std::string(term) + "'");
    }
    const std::uint32_t bit = 1u << (index + (lhs[0] == 'e' ? kRuleFlagCount : 0));
    (rhs == "1" ? f.must_set : f.must_clear) |= bit;
  }
  return f;
}

std::string GoalSpec::text() const {
  if (goals.empty()) return "no required rules";
  std::string out;
  for (const std::string& g : goals) {
    if (!out.empty()) out += ", ";
    out += g;
  }
  return out;
}

GoalSpec goal_for(CellKey key) {
  GoalSpec spec{key, {}};
  for (int i = 0; i < kCellKeyBits; ++i) {
    if (!(key.value & (1u << i))) continue;
    std::string g(rule_flag_label(static_cast<RuleFlag>(i % kRuleFlagCount)));
    g += i < kRuleFlagCount ? " (start)" : " (win)";
    spec.goals.push_back(std::move(g));
  }
  return spec;
}

Archive::Archive(ArchiveSnapshot snapshot) {
  check_integrity(snapshot);
  state_.next_id = snapshot.next_id;
  for (LevelRecord& r : snapshot.records) {
    const LevelId id = r.id;
    state_.records.emplace(id, std::move(r));
  }
  for (Cell& c : snapshot.cells) {
    const CellKey key = c.key;
    state_.cells.emplace(key, std::move(c));
  }
  state_.events = std::move(snapshot.events);
  state_.seed_corpus = std::move(snapshot.seed_corpus);
}

void Archive::on_commit(CommitHook hook) {
  std::unique_lock lock(mutex_);
  hook_ = std::move(hook);
}

ArchiveSnapshot Archive::to_snapshot(const State& state) {
  ArchiveSnapshot s;
  s.next_id = state.next_id;
  for (const auto& [_, r] : state.records) s.records.push_back(r);
  for (const auto& [_, c] : state.cells) s.cells.push_back(c);
  s.events = state.events;
  s.seed_corpus = state.seed_corpus;
  return s;
}

ArchiveSnapshot Archive::snapshot() const {
  std::shared_lock lock(mutex_);
  return to_snapshot(state_);
}

// Caller holds the writer lock.
void Archive::commit(State next) {
  if (hook_) hook_(to_snapshot(next));
  state_ = std::move(next);
}

LevelRecord Archive::submit(const Submission& submission) {
  const LevelGrid grid = decode_level(submission.grid_text);
  require_level_bounds(grid);
  const std::vector<Action> actions = decode_solution(submission.solution);
  const ReplayOutcome outcome = replay(grid, actions);
  if (!outcome.won) {
    throw Error(ErrorCode::Unverified, "unverified: the solution does not win the level");
  }

  LevelRecord record;
  record.author = submission.author;
  record.grid_text = encode_level(grid);
  record.solution = submission.solution;
  record.start_flags = outcome.start_flags;
  record.end_flags = outcome.end_flags;
  record.cell = behavior_key(outcome.start_flags, outcome.end_flags);
  record.created_at = submission.created_at.value_or(now_seconds());
  record.provenance = submission.provenance;

  std::unique_lock lock(mutex_);
  State next = state_;
  Cell& cell = next.cells[record.cell];
  cell.key = record.cell;
  for (LevelId id : cell.rated) {
    if (next.records.at(id).grid_text == record.grid_text) {
      throw Error(ErrorCode::Conflict, "duplicate: level " + std::to_string(id) +
                                           " with the same grid is already in cell " +
                                           std::to_string(record.cell.value));
    }
  }
  record.id = next.next_id++;
  cell.rated.push_back(record.id);
  next.records.emplace(record.id, record);
  commit(std::move(next));
  return record;
}

std::optional<EliteChange> Archive::reevaluate_elite(State& state, CellKey key) {
  const auto cit = state.cells.find(key);
  if (cit == state.cells.end()) return std::nullopt;
  Cell& cell = cit->second;

  const LevelRecord* best = nullptr;
  for (LevelId id : cell.rated) {
    const LevelRecord& r = state.records.at(id);
    if (elite_eligible(r) && (!best || higher_average(r, *best))) best = &r;
  }

  std::optional<LevelId> chosen = cell.elite;
  const LevelRecord* incumbent = cell.elite ? &state.records.at(*cell.elite) : nullptr;
  if (incumbent && elite_eligible(*incumbent)) {
    if (best && higher_average(*best, *incumbent)) chosen = best->id;
  } else {
    chosen = best ? std::optional<LevelId>(best->id) : std::nullopt;
  }
  if (chosen == cell.elite) return std::nullopt;
  EliteChange change{cell.elite, chosen};
  cell.elite = chosen;
  return change;
}

std::optional<EliteChange> Archive::promote_elite(CellKey key) {
  std::unique_lock lock(mutex_);
  State next = state_;
  auto change = reevaluate_elite(next, key);
  if (change) commit(std::move(next));
  return change;
}

std::pair<LevelRecord, LevelRecord> Archive::record_rating(RatingEvent event) {
  if (event.level_a == event.level_b) {
    throw Error(ErrorCode::Conflict, "a level cannot be rated against itself");
  }
  for (LevelId w : {event.harder_winner, event.design_winner}) {
    if (w != event.level_a && w != event.level_b) {
      throw Error(ErrorCode::Conflict, "winner " + std::to_string(w) + " is not in the pair");
    }
  }
  if (event.timestamp == 0) event.timestamp = now_seconds();

  std::unique_lock lock(mutex_);
  for (LevelId id : {event.level_a, event.level_b}) {
    if (!state_.records.count(id)) {
      throw Error(ErrorCode::NotFound, "level " + std::to_string(id) + " does not exist");
    }
  }
  State next = state_;
  const std::size_t index = next.events.size();
  next.events.push_back(event);
  for (LevelId id : {event.level_a, event.level_b}) {
    LevelRecord& r = next.records.at(id);
    const int score = event_score(event, id);
    r.ratings.push_back({index, score});
    r.rating_sum += score;
    ++r.rating_count;
  }
  const CellKey cell_a = next.records.at(event.level_a).cell;
  const CellKey cell_b = next.records.at(event.level_b).cell;
  reevaluate_elite(next, cell_a);
  if (cell_b != cell_a) reevaluate_elite(next, cell_b);

  std::pair<LevelRecord, LevelRecord> out{next.records.at(event.level_a),
                                          next.records.at(event.level_b)};
  commit(std::move(next));
  return out;
}

std::vector<CellSummary> Archive::sample_cells(int count, const CellFilter& filter,
                                               CellSort sort, std::uint64_t seed) const {
  std::shared_lock lock(mutex_);
  std::vector<CellKey> pool;
  if (filter.include_unpopulated) {
    for (std::uint32_t k = 0; k < kCellCount; ++k) {
      if (filter.matches(CellKey{k})) pool.push_back(CellKey{k});
    }
  } else {
    for (const auto& [key, _] : state_.cells) {
      if (filter.matches(key)) pool.push_back(key);
    }
  }

  const std::size_t n = std::min(pool.size(), static_cast<std::size_t>(std::max(count, 0)));
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
  }
  pool.resize(n);
  if (sort == CellSort::Simplicity) {
    std::sort(pool.begin(), pool.end(), [](CellKey a, CellKey b) {
      return std::pair(a.popcount(), a.value) < std::pair(b.popcount(), b.value);
    });
  }

  std::vector<CellSummary> out;
  out.reserve(pool.size());
  for (CellKey key : pool) {
    CellSummary summary{key, 0, std::nullopt};
    if (const auto it = state_.cells.find(key); it != state_.cells.end()) {
      summary.rated_count = it->second.rated.size();
      summary.elite = it->second.elite;
    }
    out.push_back(summary);
  }
  return out;
}

std::vector<GoalSpec> Archive::suggest_goals(int k) const {
  std::shared_lock lock(mutex_);
  std::vector<GoalSpec> out;
  for (std::uint32_t key : keys_by_simplicity()) {
    if (static_cast<int>(out.size()) >= k) break;
    if (!state_.cells.count(CellKey{key})) out.push_back(goal_for(CellKey{key}));
  }
  return out;
}

LevelRecord Archive::level(LevelId id) const {
  std::shared_lock lock(mutex_);
  const auto it = state_.records.find(id);
  if (it == state_.records.end()) {
    throw Error(ErrorCode::NotFound, "level " + std::to_string(id) + " does not exist");
  }
  return it->second;
}

std::vector<LevelRecord> Archive::cell_levels(CellKey key) const {
  std::shared_lock lock(mutex_);
  const auto it = state_.cells.find(key);
  if (it == state_.cells.end()) {
    throw Error(ErrorCode::NotFound, "cell " + std::to_string(key.value) + " is not populated");
  }
  std::vector<LevelRecord> out;
  for (LevelId id : it->second.rated) out.push_back(state_.records.at(id));
  return out;
}

std::optional<Cell> Archive::cell(CellKey key) const {
  std::shared_lock lock(mutex_);
  const auto it = state_.cells.find(key);
  if (it == state_.cells.end()) return std::nullopt;
  return it->second;
}

std::vector<LevelRecord> Archive::elites() const {
  std::shared_lock lock(mutex_);
  std::vector<LevelRecord> out;
  for (const auto& [_, c] : state_.cells) {
    if (c.elite) out.push_back(state_.records.at(*c.elite));
  }
  return out;
}

std::size_t Archive::size() const {
  std::shared_lock lock(mutex_);
  return state_.records.size();
}

std::optional<std::pair<LevelId, LevelId>> Archive::draw_rating_pair(std::uint64_t seed) const {
  std::shared_lock lock(mutex_);
  if (state_.records.size() < 2) return std::nullopt;
  std::vector<LevelId> ids;
  for (const auto& [id, _] : state_.records) ids.push_back(id);
  Rng rng(seed);
  const std::size_t a = rng.index(ids.size());
  std::size_t b = rng.index(ids.size() - 1);
  if (b >= a) ++b;
  return std::pair(ids[a], ids[b]);
}

ArchiveStats Archive::stats() const {
  std::shared_lock lock(mutex_);
  ArchiveStats st;
  st.populated_cells = state_.cells.size();
  st.records = state_.records.size();
  for (const auto& [_, c] : state_.cells) st.elites += c.elite.has_value();
  for (const auto& [_, r] : state_.records) {
    ++st.by_provenance[static_cast<int>(r.provenance)];
    for (int i = 0; i < kCellKeyBits; ++i) {
      if (r.cell.value & (1u << i)) ++st.rule_histogram[i];
    }
    st.total_activations += static_cast<std::size_t>(r.cell.popcount());
  }
  return st;
}

std::vector<VerifyFailure> Archive::verify() const {
  std::shared_lock lock(mutex_);
  std::vector<VerifyFailure> failures;
  for (const auto& [id, r] : state_.records) {
    try {
      const LevelGrid grid = decode_level(r.grid_text);
      const ReplayOutcome out = replay(grid, decode_solution(r.solution));
      if (!out.won) {
        failures.push_back({id, "solution no longer wins"});
      } else if (behavior_key(out.start_flags, out.end_flags) != r.cell) {
        failures.push_back({id, "replayed rule flags disagree with the stored cell"});
      }
    } catch (const Error& e) {
      failures.push_back({id, e.what()});
    }
  }
  return failures;
}

}  // namespace baba
