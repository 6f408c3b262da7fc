#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace baba {

class HttpServer;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitUnsolved = 2;

struct CliHooks {
  /// Called by `serve` once bound, just before it starts listening.
  std::function<void(HttpServer&, int port)> on_serving;
};

/// Entry point of the babayall tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliHooks& hooks = {});

}  // namespace baba
