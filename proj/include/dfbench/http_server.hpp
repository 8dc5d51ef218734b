#pragma once

#include <memory>
#include <string>

#include "dfbench/service.hpp"

namespace dfbench::service {

/// HTTP front end over a BenchService.
///
///   POST /phases/{name}/submissions   CSV body, team from X-Team or ?team=
///   GET  /leaderboard[?view=validation]
///   GET  /receipts/{id}
///   POST /admin/rescore?k=K           Authorization: Bearer <operator token>
///
/// Responses are JSON and never carry labels or generator names.
class HttpServer {
 public:
  explicit HttpServer(BenchService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dfbench::service
