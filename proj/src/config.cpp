#include "baba/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "baba/error.hpp"
#include "baba/solver.hpp"

namespace baba {

namespace {

[[noreturn]] void bad_config(const std::string& what) {
  throw Error(ErrorCode::InvalidLevel, "config: " + what);
}

int parse_int(const std::string& name, const std::string& text) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  bad_config(name + " is not an integer: '" + text + "'");
}

void check(ServiceConfig& c) {
  if (c.port < 0 || c.port > 65535) bad_config("port out of range");
  if (c.budget_cap < 1) bad_config("budget_cap must be positive");
  c.budget_cap = std::min(c.budget_cap, kDefaultMaxExpansions);
  if (c.session_ttl.count() < 1) bad_config("session_ttl_minutes must be positive");
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

ServiceConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  ServiceConfig c;
  if (file) {
    std::ifstream in(*file);
    if (!in) bad_config("cannot read " + file->string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
      c.host = j.value("host", c.host);
      c.port = j.value("port", c.port);
      c.data_dir = j.value("data_dir", c.data_dir.string());
      c.budget_cap = j.value("budget_cap", c.budget_cap);
      c.ui_dir = j.value("ui_dir", c.ui_dir.string());
      c.session_ttl = std::chrono::minutes(j.value("session_ttl_minutes", 30));
    } catch (const nlohmann::json::exception& e) {
      bad_config(file->string() + ": " + e.what());
    }
  }
  if (auto v = env("BABA_PORT")) c.port = parse_int("BABA_PORT", *v);
  if (auto v = env("BABA_DATA_DIR")) c.data_dir = *v;
  if (auto v = env("BABA_BUDGET_CAP")) c.budget_cap = parse_int("BABA_BUDGET_CAP", *v);
  if (auto v = env("BABA_UI_DIR")) c.ui_dir = *v;
  check(c);
  return c;
}

}  // namespace baba
