#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace baba {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  /// Upper bound on solver expansions per request, never above 10000.
  int budget_cap = 10000;
  /// Directory served at "/" when it exists.
  std::filesystem::path ui_dir;
  std::chrono::minutes session_ttl{30};
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Defaults, then the JSON config file if given, then BABA_PORT,
/// BABA_DATA_DIR, BABA_BUDGET_CAP and BABA_UI_DIR from `env`.
/// Throws Error(InvalidLevel) on unreadable files or bad values.
ServiceConfig load_config(const std::optional<std::filesystem::path>& file,
                          const EnvLookup& env = process_env);

}  // namespace baba
