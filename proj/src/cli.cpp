#include "baba/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "baba/archive.hpp"
#include "baba/error.hpp"
#include "baba/evolver.hpp"
#include "baba/level_text.hpp"
#include "baba/service.hpp"
#include "baba/solver.hpp"
#include "baba/store.hpp"

namespace baba {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void report(std::ostream& err, const Error& e) {
  err << "error: " << error_code_name(e.code());
  if (e.position()) err << " at row " << e.position()->row << ", column " << e.position()->column;
  err << ": " << e.what() << "\n";
}

std::string flag_names(const RuleFlags& flags) {
  std::string out;
  for (int i = 0; i < kRuleFlagCount; ++i) {
    if (!flags.bits.test(i)) continue;
    if (!out.empty()) out += ", ";
    out += rule_flag_label(static_cast<RuleFlag>(i));
  }
  return out.empty() ? "none" : out;
}

/// Archive stored in `dir`, or an empty one when the directory has none yet.
ArchiveSnapshot read_archive(const std::filesystem::path& dir) {
  const auto file = dir / "archive.json";
  if (!std::filesystem::exists(file)) return ArchiveSnapshot{};
  return load_snapshot(file);
}

int cmd_solve(const std::string& file, int max_expansions, std::ostream& out) {
  const LevelGrid grid = decode_level(read_file(file));
  require_level_bounds(grid);
  const int budget = std::clamp(max_expansions, 1, kDefaultMaxExpansions);
  const SolveResult r = solve(grid, SolverBudget{budget});
  if (!r.solved()) {
    out << "unsolved: "
        << (r.exhausted_space ? "no winning state is reachable" : "budget exhausted") << " after "
        << r.expansions << " of " << budget << " expansions\n";
    return kExitUnsolved;
  }
  const Solution& s = *r.solution;
  out << "solution: " << encode_solution(s.actions) << "\n"
      << "moves: " << s.actions.size() << "\n"
      << "expansions: " << r.expansions << "\n"
      << "start rules: " << flag_names(s.start_flags) << "\n"
      << "win rules: " << flag_names(s.end_flags) << "\n"
      << "cell: " << behavior_key(s.start_flags, s.end_flags).value << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& file, std::ostream& out) {
  const LevelGrid grid = decode_level(read_file(file));
  require_level_bounds(grid);
  const RuleSet rules = scan_rules(grid);
  out << grid.width() << "x" << grid.height() << ", " << grid.entity_count() << " sprites\n";
  for (const Rule& r : rules.rules()) out << to_string(r) << "\n";
  return kExitOk;
}

struct EvolveArgs {
  std::string refs;
  int iters = 100;
  std::uint64_t seed = 0;
  std::string init = "random-marginal";
  std::string from;
  std::string out;
  double mutation_rate = 2.0;
  double paste_prob = 0.3;
  std::optional<double> target;
};

int cmd_evolve(const EvolveArgs& a, std::ostream& out) {
  EvolverParams params;
  const auto mode = parse_init_mode(a.init);
  if (!mode) throw Error(ErrorCode::InvalidLevel, "unknown init mode '" + a.init + "'");
  params.init_mode = *mode;
  params.max_iterations = a.iters;
  params.mutation_rate = a.mutation_rate;
  params.pattern_paste_prob = a.paste_prob;
  params.target_fitness = a.target;

  EvolverInit init;
  init.seed = a.seed;
  if (a.refs.empty()) {
    for (const NamedLevel& seed : seed_corpus()) init.references.push_back(decode_level(seed.text));
  } else {
    for (const NamedLevel& level : load_level_dir(a.refs)) {
      init.references.push_back(decode_level(level.text));
    }
    if (init.references.empty()) {
      throw Error(ErrorCode::InvalidLevel, "no .txt levels in " + a.refs);
    }
  }
  if (!a.from.empty()) init.editor_grid = decode_level(read_file(a.from));

  const EvolverState s = run(init_evolver(std::move(init), params), params);
  out << "iteration fitness\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < s.trace.size(); ++i) out << i << " " << s.trace[i] << "\n";
  const std::string grid = encode_level(s.best().grid);
  out << "best:\n" << grid;
  if (!a.out.empty()) {
    std::ofstream file(a.out, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + a.out);
    file << grid;
  }
  return kExitOk;
}

int cmd_archive(const std::string& action, const std::string& data, int k, std::ostream& out,
                std::ostream& err) {
  Archive archive(read_archive(data));
  if (action == "stats") {
    const ArchiveStats st = archive.stats();
    out << "populated cells: " << st.populated_cells << "\n"
        << "records: " << st.records << "\n"
        << "elites: " << st.elites << "\n"
        << "provenance: user " << st.by_provenance[0] << ", evolver " << st.by_provenance[1]
        << ", mixed " << st.by_provenance[2] << "\n"
        << "rule activations: " << st.total_activations << "\n";
    if (st.records > 0) {
      out << "average rules per level: " << std::fixed << std::setprecision(3)
          << static_cast<double>(st.total_activations) / static_cast<double>(st.records) << "\n";
    }
    for (int i = 0; i < kCellKeyBits; ++i) {
      const std::string label = std::string(i < kRuleFlagCount ? "start " : "win   ") +
                                std::string(rule_flag_label(static_cast<RuleFlag>(i % kRuleFlagCount)));
      out << std::left << std::setw(30) << label << std::right << std::setw(5)
          << st.rule_histogram[i] << " " << std::string(std::min<std::size_t>(st.rule_histogram[i], 60), '#')
          << "\n";
    }
    return kExitOk;
  }
  if (action == "verify") {
    const auto failures = archive.verify();
    for (const VerifyFailure& f : failures) err << "level " << f.id << ": " << f.reason << "\n";
    if (!failures.empty()) {
      out << failures.size() << " of " << archive.size() << " levels failed verification\n";
      return kExitInvalid;
    }
    out << "ok: " << archive.size() << " levels replay to a win in their cells\n";
    return kExitOk;
  }
  for (const GoalSpec& g : archive.suggest_goals(k)) out << g.key.value << "\t" << g.text() << "\n";
  return kExitOk;
}

struct ServeArgs {
  std::string config;
  std::string data;
  std::string host;
  std::string ui;
  int port = -1;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, const CliHooks& hooks) {
  ServiceConfig config =
      load_config(a.config.empty() ? std::nullopt : std::optional<std::filesystem::path>(a.config));
  if (!a.data.empty()) config.data_dir = a.data;
  if (!a.host.empty()) config.host = a.host;
  if (!a.ui.empty()) config.ui_dir = a.ui;
  if (a.port >= 0) config.port = a.port;

  Service service(config);
  HttpServer server(service);
  const int port = server.bind(config.host, config.port);
  out << "listening on http://" << config.host << ":" << port << " (data " << config.data_dir.string()
      << ")" << std::endl;
  if (hooks.on_serving) hooks.on_serving(server, port);
  server.listen();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliHooks& hooks) {
  CLI::App app{"Baba Is You level workbench", "babayall"};
  app.require_subcommand(1);

  std::string level_file;
  int max_expansions = kDefaultMaxExpansions;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Run the solver on a level file");
  solve_cmd->add_option("level", level_file, "Level text file")->required();
  solve_cmd->add_option("--max-expansions", max_expansions, "Expansion budget (capped at 10000)");

  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a level file and list its rules");
  validate_cmd->add_option("level", level_file, "Level text file")->required();

  EvolveArgs ev;
  CLI::App* evolve_cmd = app.add_subcommand("evolve", "Evolve a level towards reference levels");
  evolve_cmd->add_option("--refs", ev.refs, "Directory of reference .txt levels (default: seed corpus)");
  evolve_cmd->add_option("--iters", ev.iters, "Generations to run")->check(CLI::NonNegativeNumber);
  evolve_cmd->add_option("--seed", ev.seed, "Random seed");
  evolve_cmd->add_option("--init", ev.init, "random-marginal, copy-reference or from-editor");
  evolve_cmd->add_option("--from", ev.from, "Starting grid for from-editor");
  evolve_cmd->add_option("--out", ev.out, "Write the best grid here");
  evolve_cmd->add_option("--mutation-rate", ev.mutation_rate, "Expected cells resampled per child");
  evolve_cmd->add_option("--paste-prob", ev.paste_prob, "Chance of pasting a reference window");
  evolve_cmd->add_option("--target", ev.target, "Stop once the best fitness reaches this");

  std::string action;
  std::string data = "data";
  int k = 10;
  CLI::App* archive_cmd = app.add_subcommand("archive", "Inspect an archive directory");
  archive_cmd->add_option("action", action, "stats, verify or goals")
      ->required()
      ->check(CLI::IsMember({"stats", "verify", "goals"}));
  archive_cmd->add_option("--data", data, "Data directory holding archive.json");
  archive_cmd->add_option("-k", k, "Number of goals to suggest")->check(CLI::NonNegativeNumber);

  ServeArgs sv;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", sv.config, "JSON config file");
  serve_cmd->add_option("--port", sv.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--data", sv.data, "Data directory");
  serve_cmd->add_option("--host", sv.host, "Bind address");
  serve_cmd->add_option("--ui", sv.ui, "Directory of static web UI files");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    if (*solve_cmd) return cmd_solve(level_file, max_expansions, out);
    if (*validate_cmd) return cmd_validate(level_file, out);
    if (*evolve_cmd) return cmd_evolve(ev, out);
    if (*archive_cmd) return cmd_archive(action, data, k, out, err);
    if (*serve_cmd) return cmd_serve(sv, out, hooks);
  } catch (const Error& e) {
    report(err, e);
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace baba
