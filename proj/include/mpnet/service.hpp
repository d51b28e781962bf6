#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "mpnet/net.hpp"

namespace mpnet::service {

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using Clock = std::chrono::steady_clock;

struct Options {
  std::chrono::seconds idle_timeout{30 * 60};
  std::function<Clock::time_point()> now = [] { return Clock::now(); };
  /// Net used by `POST /sessions` when the body carries none.
  std::optional<net::MPNet> default_net;
};

/// In-memory simulation sessions behind a JSON request router. Thread safe:
/// requests on one session are serialised, distinct sessions run in parallel.
class Service {
 public:
  explicit Service(Options options = {});
  ~Service();

  Response handle(const Request& request);

  std::size_t session_count() const;
  /// Drop sessions idle for longer than the timeout; returns how many.
  std::size_t evict_idle();

 private:
  struct Session;

  Response create(const Request& r);
  Response dispatch(Session& s, const std::string& action, const Request& r);
  std::shared_ptr<Session> find(const std::string& id);

  Options options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// HTTP front end for a Service; CORS open to any origin.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds host:port (port 0 picks a free one); returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocking bind and listen.
void serve(Service& service, const std::string& host, int port);

}  // namespace mpnet::service
