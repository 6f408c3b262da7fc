#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "baba/archive.hpp"
#include "baba/config.hpp"
#include "baba/error.hpp"
#include "baba/evolver.hpp"

namespace baba {

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  /// Header names are matched case-insensitively; store them lowercased.
  std::map<std::string, std::string> headers;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

int http_status(ErrorCode code);

/// The HTTP API without a transport. Opens (or creates) the archive in the
/// configured data directory and writes it back after every mutation.
/// Thread-safe: the archive serialises its writers, evolver sessions each
/// have their own lock.
class Service {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit Service(ServiceConfig config, Clock clock = std::chrono::steady_clock::now);
  ~Service();

  Response handle(const Request& request);

  const ServiceConfig& config() const { return config_; }
  Archive& archive() { return archive_; }
  std::size_t session_count();

 private:
  struct Session;
  struct Idempotent;

  Response dispatch(const Request& request);
  Response create_session(const Request& request);
  Response session_call(const Request& request, const std::string& id, const std::string& verb);
  std::shared_ptr<Session> find_session(const std::string& id);
  void expire_sessions();
  std::vector<LevelGrid> default_references() const;

  ServiceConfig config_;
  Clock clock_;
  Archive archive_;

  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;

  std::mutex idempotency_mutex_;
  std::map<std::string, std::shared_ptr<Idempotent>> idempotent_;
};

/// cpp-httplib binding for a Service. Static files come from the config's
/// ui_dir when it exists.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  /// Throws std::runtime_error when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind.
  void listen();
  /// Blocks until a listen() running on another thread accepts connections.
  void wait_until_ready();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace baba
