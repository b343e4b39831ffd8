#pragma once

#include <memory>
#include <string>

#include "tactex/service/service.hpp"

namespace tactex::service {

/// The /v1 HTTP and server-sent-event facade over a Service.
///
///   GET  /v1/health
///   GET  /v1/scene?session=&image=1
///   POST /v1/scene/randomize   {session?, seed?, n?}
///   POST /v1/query             {session?, text}       -> 202 {run_id} | 409
///   GET  /v1/runs/{id}
///   GET  /v1/events?session=&follow=1                 (Last-Event-ID or ?after=)
///
/// POST endpoints honour an Idempotency-Key header.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port, or -1 on failure.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tactex::service
