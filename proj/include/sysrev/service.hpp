#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sysrev/config.hpp"
#include "sysrev/pipeline.hpp"

namespace sysrev {

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Route handlers, independent of the socket layer.
///
///   POST /api/search          run_search            200 SearchResponse
///   GET  /api/session/{id}    stored session        200 | 404
///   POST /api/feedback        record_feedback       204 | 400 | 404
///   GET  /api/metrics         Relevance% report     200
///   GET  /api/health          build/graph/providers 200
///
/// Errors are JSON objects: {"error": kind, "message": ..., "field"|"stage": ...}.
class Service {
 public:
  Service(Dependencies deps, Config config);

  HttpReply search(const std::string& body);
  HttpReply session(const std::string& query_id) const;
  HttpReply feedback(const std::string& body);
  HttpReply metrics(const std::optional<std::string>& query_id = std::nullopt) const;
  HttpReply health() const;

  const Config& config() const { return config_; }

 private:
  Dependencies deps_;
  Config config_;
};

/// cpp-httplib front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws StorageError on failure.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void start();   // listen() on a background thread
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sysrev
