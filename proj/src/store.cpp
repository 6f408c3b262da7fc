#include "baba/store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "baba/error.hpp"

namespace baba {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "babayall-archive";

std::string flags_text(const RuleFlags& f) {
  std::string s(kRuleFlagCount, '0');
  for (int i = 0; i < kRuleFlagCount; ++i) s[i] = f.bits.test(i) ? '1' : '0';
  return s;
}

RuleFlags flags_from_text(const std::string& s) {
  if (s.size() != kRuleFlagCount || s.find_first_not_of("01") != std::string::npos) {
    throw Error(ErrorCode::InvalidLevel, "archive integrity: bad rule flag string '" + s + "'");
  }
  RuleFlags f;
  for (int i = 0; i < kRuleFlagCount; ++i) f.bits.set(i, s[i] == '1');
  return f;
}

json record_json(const LevelRecord& r) {
  json ratings = json::array();
  for (const RatingScore& rs : r.ratings) ratings.push_back({{"event", rs.event}, {"score", rs.score}});
  return {{"id", r.id},
          {"author", r.author},
          {"grid", r.grid_text},
          {"solution", r.solution},
          {"start_flags", flags_text(r.start_flags)},
          {"end_flags", flags_text(r.end_flags)},
          {"cell", r.cell.value},
          {"ratings", ratings},
          {"rating_sum", r.rating_sum},
          {"rating_count", r.rating_count},
          {"created_at", r.created_at},
          {"provenance", provenance_name(r.provenance)}};
}

LevelRecord record_from(const json& j) {
  LevelRecord r;
  r.id = j.at("id").get<LevelId>();
  r.author = j.at("author").get<std::string>();
  r.grid_text = j.at("grid").get<std::string>();
  r.solution = j.at("solution").get<std::string>();
  r.start_flags = flags_from_text(j.at("start_flags").get<std::string>());
  r.end_flags = flags_from_text(j.at("end_flags").get<std::string>());
  r.cell = CellKey{j.at("cell").get<std::uint32_t>()};
  for (const json& rs : j.at("ratings")) {
    r.ratings.push_back({rs.at("event").get<std::size_t>(), rs.at("score").get<int>()});
  }
  r.rating_sum = j.at("rating_sum").get<long>();
  r.rating_count = j.at("rating_count").get<int>();
  r.created_at = j.at("created_at").get<std::int64_t>();
  const auto prov = parse_provenance(j.at("provenance").get<std::string>());
  if (!prov) throw Error(ErrorCode::InvalidLevel, "archive integrity: unknown provenance");
  r.provenance = *prov;
  return r;
}

}  // namespace

std::string snapshot_to_json(const ArchiveSnapshot& s) {
  json records = json::array();
  for (const LevelRecord& r : s.records) records.push_back(record_json(r));
  json cells = json::array();
  for (const Cell& c : s.cells) {
    json cell = {{"key", c.key.value}, {"rated", c.rated}};
    cell["elite"] = c.elite ? json(*c.elite) : json(nullptr);
    cells.push_back(std::move(cell));
  }
  json ratings = json::array();
  for (const RatingEvent& e : s.events) {
    ratings.push_back({{"level_a", e.level_a},
                       {"level_b", e.level_b},
                       {"harder_winner", e.harder_winner},
                       {"design_winner", e.design_winner},
                       {"rater", e.rater},
                       {"timestamp", e.timestamp}});
  }
  json doc = {{"format", kFormatName},     {"version", s.version}, {"next_id", s.next_id},
              {"records", records},        {"cells", cells},       {"ratings", ratings},
              {"seed_corpus", s.seed_corpus}};
  return doc.dump(2) + "\n";
}

ArchiveSnapshot snapshot_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidLevel,
                std::string("archive integrity: snapshot is not valid JSON (") + e.what() + ")");
  }
  ArchiveSnapshot s;
  try {
    if (doc.at("format").get<std::string>() != kFormatName) {
      throw Error(ErrorCode::InvalidLevel, "archive integrity: not an archive snapshot");
    }
    s.version = doc.at("version").get<int>();
    if (s.version != ArchiveSnapshot::kFormatVersion) {
      throw Error(ErrorCode::InvalidLevel,
                  "unsupported snapshot version " + std::to_string(s.version) + " (expected " +
                      std::to_string(ArchiveSnapshot::kFormatVersion) + ")");
    }
    s.next_id = doc.at("next_id").get<LevelId>();
    for (const json& r : doc.at("records")) s.records.push_back(record_from(r));
    for (const json& c : doc.at("cells")) {
      Cell cell;
      cell.key = CellKey{c.at("key").get<std::uint32_t>()};
      cell.rated = c.at("rated").get<std::vector<LevelId>>();
      if (!c.at("elite").is_null()) cell.elite = c.at("elite").get<LevelId>();
      s.cells.push_back(std::move(cell));
    }
    for (const json& e : doc.at("ratings")) {
      s.events.push_back(RatingEvent{e.at("level_a").get<LevelId>(), e.at("level_b").get<LevelId>(),
                                     e.at("harder_winner").get<LevelId>(),
                                     e.at("design_winner").get<LevelId>(),
                                     e.at("rater").get<std::string>(),
                                     e.at("timestamp").get<std::int64_t>()});
    }
    s.seed_corpus = doc.at("seed_corpus").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidLevel,
                std::string("archive integrity: malformed snapshot (") + e.what() + ")");
  }
  check_integrity(s);
  return s;
}

void save_snapshot(const std::filesystem::path& path, const ArchiveSnapshot& snapshot) {
  const std::string body = snapshot_to_json(snapshot);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << body;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ArchiveSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return snapshot_from_json(buf.str());
}

std::vector<NamedLevel> load_level_dir(const std::filesystem::path& dir) {
  std::vector<NamedLevel> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    out.push_back({entry.path().stem().string(), buf.str()});
  }
  std::sort(out.begin(), out.end(),
            [](const NamedLevel& a, const NamedLevel& b) { return a.name < b.name; });
  return out;
}

void write_level_dir(const std::filesystem::path& dir, const std::vector<NamedLevel>& levels) {
  std::filesystem::create_directories(dir);
  for (const NamedLevel& level : levels) {
    std::ofstream out(dir / (level.name + ".txt"), std::ios::binary | std::ios::trunc);
    out << level.text;
  }
}

}  // namespace baba
