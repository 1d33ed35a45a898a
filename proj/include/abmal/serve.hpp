#pragma once
// HTTP front end for one live active-learning session.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "abmal/active.hpp"

namespace abmal {

struct HttpReply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Request handlers over an ActiveSession. Label submissions and queries are
/// serialized; health() never takes the session lock.
class ServeApp {
 public:
  ServeApp(const Dataset& ds, ActiveConfig cfg, std::uint64_t split_seed);

  HttpReply state();
  HttpReply query();
  HttpReply label(const std::string& body);
  HttpReply curve();
  HttpReply health() const;

  /// Snapshot of the session's curve records.
  std::vector<CurveRecord> records();

 private:
  struct QueryView {
    std::size_t round = 0;
    std::string body;
  };

  const QueryView& current_query();

  std::mutex mu_;
  ActiveSession session_;
  std::optional<QueryView> view_;
};

/// Thin wrapper over an HTTP server bound to one ServeApp.
class HttpServer {
 public:
  explicit HttpServer(ServeApp& app);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port (port 0 picks a free port) and returns the bound port.
  /// Throws InvalidState if the address cannot be bound.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace abmal
