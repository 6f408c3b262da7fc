#include "baba/service.hpp"

#include <atomic>
#include <filesystem>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "baba/error.hpp"
#include "baba/level_text.hpp"
#include "baba/solver.hpp"
#include "baba/store.hpp"

namespace baba {

using nlohmann::json;

namespace {

constexpr std::size_t kIdempotencyMemory = 4096;
constexpr int kMaxStepsPerCall = 10000;

std::string flags_text(const RuleFlags& f) {
  std::string s(kRuleFlagCount, '0');
  for (int i = 0; i < kRuleFlagCount; ++i) s[i] = f.bits.test(i) ? '1' : '0';
  return s;
}

json record_json(const LevelRecord& r) {
  return {{"id", r.id},
          {"author", r.author},
          {"grid", r.grid_text},
          {"solution", r.solution},
          {"start_flags", flags_text(r.start_flags)},
          {"end_flags", flags_text(r.end_flags)},
          {"cell", r.cell.value},
          {"rating_count", r.rating_count},
          {"rating_sum", r.rating_sum},
          {"average_rating", r.average_rating()},
          {"created_at", r.created_at},
          {"provenance", provenance_name(r.provenance)}};
}

json goal_json(const GoalSpec& g) {
  return {{"key", g.key.value}, {"goals", g.goals}, {"text", g.text()}};
}

Response reply(int status, const json& body) { return Response{status, body.dump() + "\n"}; }

Response error_reply(const Error& e) {
  json body = {{"code", error_code_name(e.code())}, {"message", e.what()}};
  if (e.position()) body["position"] = {{"row", e.position()->row}, {"column", e.position()->column}};
  return reply(http_status(e.code()), body);
}

[[noreturn]] void bad_request(const std::string& what) {
  throw Error(ErrorCode::InvalidLevel, what);
}

json parse_body(const Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) bad_request("request body must be a JSON object");
    return j;
  } catch (const json::parse_error&) {
    bad_request("request body is not valid JSON");
  }
}

std::string field_string(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end() || !it->is_string()) {
    bad_request(std::string("field '") + name + "' must be a string");
  }
  return it->get<std::string>();
}

template <class T>
std::optional<T> field_number(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) bad_request(std::string("field '") + name + "' must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) bad_request(std::string("field '") + name + "' must be an integer");
  }
  return it->get<T>();
}

std::optional<std::string> query_value(const Request& req, const std::string& name) {
  const auto it = req.query.find(name);
  if (it == req.query.end()) return std::nullopt;
  return it->second;
}

long long query_int(const Request& req, const std::string& name, long long fallback) {
  const auto v = query_value(req, name);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const long long n = std::stoll(*v, &used);
    if (used == v->size()) return n;
  } catch (const std::exception&) {
  }
  bad_request("query parameter '" + name + "' must be an integer");
}

std::uint64_t parse_id(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used == text.size() && text[0] != '-') return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::NotFound, std::string("no ") + what + " '" + text + "'");
}

LevelGrid bounded_grid(const std::string& text) {
  LevelGrid g = decode_level(text);
  require_level_bounds(g);
  return g;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

ArchiveSnapshot open_snapshot(const ServiceConfig& config) {
  std::filesystem::create_directories(config.data_dir);
  const auto file = config.data_dir / "archive.json";
  if (std::filesystem::exists(file)) return load_snapshot(file);
  ArchiveSnapshot fresh;
  for (const NamedLevel& seed : seed_corpus()) fresh.seed_corpus.push_back(seed.name);
  return fresh;
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidLevel: return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::Unverified:
    case ErrorCode::BudgetExhausted: return 422;
  }
  return 500;
}

struct Service::Session {
  std::mutex mutex;
  std::atomic<bool> pause_requested{false};
  std::string id;
  EvolverParams params;
  EvolverState state;
  /// Guarded by the service's session table lock, not `mutex`.
  std::chrono::steady_clock::time_point last_used;

  json to_json() const {
    json population = json::array();
    for (const Individual& ind : state.population) {
      population.push_back({{"grid", encode_level(ind.grid)}, {"fitness", ind.fitness}});
    }
    return {{"id", id},
            {"iteration", state.iteration},
            {"paused", state.paused},
            {"seed", state.seed},
            {"init_mode", init_mode_name(params.init_mode)},
            {"best", {{"grid", encode_level(state.best().grid)}, {"fitness", state.best().fitness}}},
            {"population", population},
            {"trace", state.trace}};
  }
};

struct Service::Idempotent {
  std::mutex mutex;
  std::string fingerprint;
  std::optional<Response> response;
};

Service::Service(ServiceConfig config, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)), archive_(open_snapshot(config_)) {
  const auto seed_dir = config_.data_dir / "seed";
  if (!std::filesystem::exists(seed_dir)) write_level_dir(seed_dir, seed_corpus());
  const auto file = config_.data_dir / "archive.json";
  if (!std::filesystem::exists(file)) save_snapshot(file, archive_.snapshot());
  archive_.on_commit([file](const ArchiveSnapshot& s) { save_snapshot(file, s); });
}

Service::~Service() = default;

std::size_t Service::session_count() {
  expire_sessions();
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

Response Service::handle(const Request& request) {
  const bool mutating = request.method == "POST" || request.method == "DELETE";
  const auto key = request.headers.find("idempotency-key");
  if (!mutating || key == request.headers.end()) {
    return dispatch(request);
  }

  std::shared_ptr<Idempotent> entry;
  {
    std::lock_guard lock(idempotency_mutex_);
    auto& slot = idempotent_[key->second];
    if (!slot) {
      if (idempotent_.size() > kIdempotencyMemory) {
        // Forget finished entries once the table is full.
        for (auto it = idempotent_.begin(); it != idempotent_.end();) {
          it = it->second && it->second->response ? idempotent_.erase(it) : std::next(it);
        }
      }
      slot = std::make_shared<Idempotent>();
    }
    entry = slot;
  }

  std::string fingerprint = request.method + " " + request.path + "?";
  for (const auto& [k, v] : request.query) fingerprint += k + "=" + v + "&";
  fingerprint += "\n" + request.body;

  std::lock_guard lock(entry->mutex);
  if (entry->response) {
    if (entry->fingerprint != fingerprint) {
      return error_reply(
          Error(ErrorCode::Conflict, "idempotency key was already used for a different request"));
    }
    return *entry->response;
  }
  entry->fingerprint = std::move(fingerprint);
  entry->response = dispatch(request);
  return *entry->response;
}

Response Service::dispatch(const Request& req) {
  try {
    const std::vector<std::string> p = split_path(req.path);
    const std::string& m = req.method;
    const std::size_t n = p.size();

    if (m == "GET" && n == 1 && p[0] == "health") {
      return reply(200, {{"status", "ok"}, {"levels", archive_.size()}});
    }

    if (m == "GET" && n == 1 && p[0] == "cells") {
      const long long count = query_int(req, "count", kDefaultSampleCount);
      if (count < 0) bad_request("count must be non-negative");
      CellFilter filter = parse_cell_filter(query_value(req, "filter").value_or(""));
      const std::string unpopulated = query_value(req, "unpopulated").value_or("0");
      filter.include_unpopulated = unpopulated == "1" || unpopulated == "true";
      const std::string sort = query_value(req, "sort").value_or("simplicity");
      if (sort != "simplicity" && sort != "random") bad_request("sort must be simplicity or random");
      const auto seed = static_cast<std::uint64_t>(query_int(req, "seed", 0));
      json cells = json::array();
      for (const CellSummary& c :
           archive_.sample_cells(static_cast<int>(std::min<long long>(count, kCellCount)), filter,
                                 sort == "random" ? CellSort::Random : CellSort::Simplicity, seed)) {
        cells.push_back({{"key", c.key.value},
                         {"start_flags", flags_text(c.key.start_flags())},
                         {"end_flags", flags_text(c.key.end_flags())},
                         {"rated_count", c.rated_count},
                         {"elite", c.elite ? json(*c.elite) : json(nullptr)},
                         {"goals", goal_for(c.key).goals}});
      }
      return reply(200, {{"cells", cells}});
    }

    if (m == "GET" && n == 3 && p[0] == "cells" && p[2] == "levels") {
      const auto key = parse_id(p[1], "cell");
      if (key >= kCellCount) throw Error(ErrorCode::NotFound, "no cell '" + p[1] + "'");
      const CellKey cell{static_cast<std::uint32_t>(key)};
      json levels = json::array();
      for (const LevelRecord& r : archive_.cell_levels(cell)) levels.push_back(record_json(r));
      const auto elite = archive_.cell(cell)->elite;
      return reply(200, {{"key", cell.value},
                         {"elite", elite ? json(*elite) : json(nullptr)},
                         {"levels", levels}});
    }

    if (m == "GET" && n == 1 && p[0] == "goals") {
      const long long k = query_int(req, "k", 10);
      if (k < 0) bad_request("k must be non-negative");
      json goals = json::array();
      for (const GoalSpec& g : archive_.suggest_goals(static_cast<int>(std::min<long long>(k, kCellCount)))) {
        goals.push_back(goal_json(g));
      }
      return reply(200, {{"goals", goals}});
    }

    if (m == "GET" && n == 2 && p[0] == "levels") {
      return reply(200, record_json(archive_.level(parse_id(p[1], "level"))));
    }

    if (m == "POST" && n == 1 && p[0] == "levels") {
      const json body = parse_body(req);
      Submission s;
      s.grid_text = field_string(body, "grid");
      s.solution = field_string(body, "solution");
      s.author = body.contains("author") ? field_string(body, "author") : "anonymous";
      if (body.contains("provenance")) {
        const auto prov = parse_provenance(field_string(body, "provenance"));
        if (!prov) bad_request("provenance must be user, evolver or mixed");
        s.provenance = *prov;
      }
      return reply(201, record_json(archive_.submit(s)));
    }

    if (m == "POST" && n == 1 && p[0] == "solve") {
      const json body = parse_body(req);
      const LevelGrid grid = bounded_grid(field_string(body, "grid"));
      const int requested = field_number<int>(body, "max_expansions").value_or(config_.budget_cap);
      if (requested < 1) bad_request("max_expansions must be positive");
      const int budget = std::min(requested, config_.budget_cap);
      const SolveResult r = solve(grid, SolverBudget{budget});
      if (!r.solved()) {
        return reply(422, {{"code", error_code_name(ErrorCode::BudgetExhausted)},
                           {"message", r.exhausted_space
                                           ? "no winning state is reachable"
                                           : "no solution within " + std::to_string(budget) +
                                                 " expansions"},
                           {"expansions", r.expansions},
                           {"budget", budget},
                           {"exhausted_space", r.exhausted_space}});
      }
      const Solution& sol = *r.solution;
      return reply(200, {{"solution", encode_solution(sol.actions)},
                         {"length", sol.actions.size()},
                         {"expansions", r.expansions},
                         {"budget", budget},
                         {"start_flags", flags_text(sol.start_flags)},
                         {"end_flags", flags_text(sol.end_flags)},
                         {"cell", behavior_key(sol.start_flags, sol.end_flags).value}});
    }

    if (m == "POST" && n == 1 && p[0] == "ratings") {
      const json body = parse_body(req);
      auto id = [&](const char* name) {
        const auto v = field_number<long long>(body, name);
        if (!v || *v < 0) bad_request(std::string("field '") + name + "' must be a level id");
        return static_cast<LevelId>(*v);
      };
      RatingEvent e{id("level_a"), id("level_b"), id("harder_winner"), id("design_winner"),
                    body.contains("rater") ? field_string(body, "rater") : "anonymous", 0};
      const auto [a, b] = archive_.record_rating(e);
      auto side = [&](const LevelRecord& r) {
        const auto elite = archive_.cell(r.cell)->elite;
        return json{{"id", r.id},
                    {"score", event_score(e, r.id)},
                    {"average_rating", r.average_rating()},
                    {"rating_count", r.rating_count},
                    {"cell", r.cell.value},
                    {"elite", elite == r.id}};
      };
      return reply(200, {{"level_a", side(a)}, {"level_b", side(b)}});
    }

    if (m == "GET" && n == 2 && p[0] == "ratings" && p[1] == "pair") {
      const auto pair = archive_.draw_rating_pair(static_cast<std::uint64_t>(query_int(req, "seed", 0)));
      if (!pair) throw Error(ErrorCode::NotFound, "fewer than two levels to compare");
      return reply(200, {{"level_a", record_json(archive_.level(pair->first))},
                         {"level_b", record_json(archive_.level(pair->second))}});
    }

    if (n >= 1 && p[0] == "evolve") {
      expire_sessions();
      if (m == "POST" && n == 1) return create_session(req);
      if (n == 2 && (m == "GET" || m == "DELETE")) return session_call(req, p[1], m == "GET" ? "" : "delete");
      if (n == 3 && m == "POST") return session_call(req, p[1], p[2]);
    }

    throw Error(ErrorCode::NotFound, "no route for " + m + " " + req.path);
  } catch (const Error& e) {
    return error_reply(e);
  }
}

std::vector<LevelGrid> Service::default_references() const {
  std::vector<LevelGrid> refs;
  for (const LevelRecord& r : archive_.elites()) refs.push_back(decode_level(r.grid_text));
  if (refs.empty()) {
    for (const NamedLevel& seed : seed_corpus()) refs.push_back(decode_level(seed.text));
  }
  return refs;
}

Response Service::create_session(const Request& req) {
  const json body = parse_body(req);
  const json params_json = body.value("params", json::object());
  if (!params_json.is_object()) bad_request("field 'params' must be an object");

  EvolverParams params;
  params.epsilon = field_number<double>(params_json, "epsilon").value_or(params.epsilon);
  params.mutation_rate = field_number<double>(params_json, "mutation_rate").value_or(params.mutation_rate);
  params.pattern_paste_prob =
      field_number<double>(params_json, "pattern_paste_prob").value_or(params.pattern_paste_prob);
  params.max_iterations = field_number<int>(params_json, "max_iterations").value_or(params.max_iterations);
  params.target_fitness = field_number<double>(params_json, "target_fitness");
  for (const json* j : {&body, &params_json}) {
    if (j->contains("init_mode")) {
      const auto mode = parse_init_mode(field_string(*j, "init_mode"));
      if (!mode) bad_request("init_mode must be random-marginal, copy-reference or from-editor");
      params.init_mode = *mode;
    }
  }
  validate(params);

  EvolverInit init;
  if (body.contains("refs")) {
    if (!body["refs"].is_array() || body["refs"].empty()) bad_request("field 'refs' must be a non-empty array");
    for (const json& r : body["refs"]) {
      if (!r.is_string()) bad_request("field 'refs' must hold level texts");
      init.references.push_back(bounded_grid(r.get<std::string>()));
    }
  } else {
    init.references = default_references();
  }
  init.seed = field_number<std::uint64_t>(body, "seed").value_or(0);
  if (body.contains("grid")) init.editor_grid = bounded_grid(field_string(body, "grid"));
  init.width = field_number<int>(body, "width").value_or(0);
  init.height = field_number<int>(body, "height").value_or(0);
  for (int side : {init.width, init.height}) {
    if (side != 0 && (side < kMinLevelSide || side > kMaxLevelSide)) {
      bad_request("width and height must be within 5..20");
    }
  }

  auto session = std::make_shared<Session>();
  session->params = params;
  session->state = init_evolver(std::move(init), params);
  session->last_used = clock_();
  {
    std::lock_guard lock(sessions_mutex_);
    session->id = std::to_string(next_session_++);
    sessions_[session->id] = session;
  }
  return reply(201, session->to_json());
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "no evolver session '" + id + "'");
  it->second->last_used = clock_();
  return it->second;
}

void Service::expire_sessions() {
  const auto now = clock_();
  std::lock_guard lock(sessions_mutex_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    it = now - it->second->last_used > config_.session_ttl ? sessions_.erase(it) : std::next(it);
  }
}

Response Service::session_call(const Request& req, const std::string& id, const std::string& verb) {
  std::shared_ptr<Session> s = find_session(id);

  if (verb == "delete") {
    s->pause_requested = true;
    std::lock_guard lock(sessions_mutex_);
    sessions_.erase(id);
    return reply(200, {{"deleted", id}});
  }
  if (verb == "pause") {
    // Takes effect between generations of an in-flight step.
    s->pause_requested = true;
    std::lock_guard lock(s->mutex);
    s->state.paused = true;
    return reply(200, s->to_json());
  }
  if (verb == "resume") {
    std::lock_guard lock(s->mutex);
    s->pause_requested = false;
    s->state.paused = false;
    return reply(200, s->to_json());
  }
  if (verb == "step") {
    const long long steps = query_int(req, "n", 1);
    if (steps < 1 || steps > kMaxStepsPerCall) bad_request("n must be within 1..10000");
    std::unique_lock lock(s->mutex, std::try_to_lock);
    if (!lock.owns_lock()) throw Error(ErrorCode::Conflict, "session " + id + " is already stepping");
    if (s->state.paused) throw Error(ErrorCode::Conflict, "session " + id + " is paused");
    for (long long i = 0; i < steps; ++i) {
      if (s->pause_requested) {
        s->state.paused = true;
        break;
      }
      if (s->params.target_fitness && s->state.best().fitness <= *s->params.target_fitness) break;
      s->state = evolve_step(s->state, s->params);
    }
    {
      std::lock_guard sessions_lock(sessions_mutex_);
      s->last_used = clock_();
    }
    return reply(200, s->to_json());
  }
  if (verb == "export") {
    std::lock_guard lock(s->mutex);
    const Individual& best = s->state.best();
    return reply(200, {{"id", id}, {"grid", encode_level(best.grid)}, {"fitness", best.fitness}});
  }
  if (verb.empty()) {
    std::lock_guard lock(s->mutex);
    return reply(200, s->to_json());
  }
  throw Error(ErrorCode::NotFound, "no route for " + req.method + " " + req.path);
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {
    // httplib's default also sets SO_REUSEPORT, which lets a second server
    // silently share a busy port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    const auto& ui = service.config().ui_dir;
    if (!ui.empty() && std::filesystem::is_directory(ui)) server.set_mount_point("/", ui.string());

    auto handler = [this](const httplib::Request& in, httplib::Response& out) {
      Request req;
      req.method = in.method;
      req.path = in.path;
      req.body = in.body;
      for (const auto& [k, v] : in.params) req.query.emplace(k, v);
      for (const auto& [k, v] : in.headers) {
        std::string name = k;
        for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        req.headers.emplace(std::move(name), v);
      }
      const Response r = service.handle(req);
      out.status = r.status;
      out.set_content(r.body, r.content_type);
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Delete(".*", handler);
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error("cannot bind " + host + " on any port");
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port) +
                             " (address already in use?)");
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() { impl_->server.wait_until_ready(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace baba
