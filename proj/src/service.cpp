#include "sysrev/service.hpp"

#include <thread>

#include <httplib.h>

#include "sysrev/error.hpp"
#include "sysrev/feedback.hpp"
#include "sysrev/json_io.hpp"

namespace sysrev {
namespace {

using nlohmann::json;

HttpReply json_reply(int status, const json& body) { return HttpReply{status, body.dump(), "application/json"}; }

HttpReply error_reply(int status, const Error& e) {
  json body{{"error", e.kind()}, {"message", e.what()}};
  if (auto* v = dynamic_cast<const ValidationError*>(&e)) body["field"] = v->field();
  if (auto* s = dynamic_cast<const StageError*>(&e)) {
    body["stage"] = s->stage();
    if (!s->trace().iterations.empty()) body["trace"] = to_json(s->trace());
  }
  return json_reply(status, body);
}

int status_for(const StageError& e) {
  if (e.backend_failure() || e.kind() == "ProviderUnavailable") return 502;
  if (e.kind() == "ValidationError" || e.kind() == "EmptyExpansion") return 400;
  return 500;
}

json parse_body(const std::string& body) {
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ValidationError("body", "not valid JSON");
  return j;
}

}  // namespace

Service::Service(Dependencies deps, Config config) : deps_(std::move(deps)), config_(std::move(config)) {}

HttpReply Service::search(const std::string& body) {
  try {
    auto request = request_from_json(parse_body(body), config_);
    return json_reply(200, to_json(run_search(request, deps_)));
  } catch (const StageError& e) {
    return error_reply(status_for(e), e);
  } catch (const ValidationError& e) {
    return error_reply(400, e);
  } catch (const Error& e) {
    return error_reply(500, e);
  }
}

HttpReply Service::session(const std::string& query_id) const {
  if (!deps_.store) return error_reply(404, UnknownSession(query_id));
  auto s = deps_.store->session(query_id);
  if (!s) return error_reply(404, UnknownSession(query_id));
  json body = to_json(*s);
  json feedback = json::array();
  for (const auto& r : deps_.store->feedback_for(query_id)) feedback.push_back(to_json(r));
  body["feedback"] = feedback;
  return json_reply(200, body);
}

HttpReply Service::feedback(const std::string& body) {
  try {
    if (!deps_.store) throw StorageError("no feedback store configured");
    auto j = parse_body(body);
    auto record = feedback_from_json(j);
    if (!j.contains("ts")) record.timestamp = now_utc();
    deps_.store->record_feedback(record);
    return HttpReply{204, "", "application/json"};
  } catch (const ValidationError& e) {
    return error_reply(400, e);
  } catch (const UnknownSession& e) {
    return error_reply(404, e);
  } catch (const Error& e) {
    return error_reply(500, e);
  }
}

HttpReply Service::metrics(const std::optional<std::string>& query_id) const {
  try {
    if (!deps_.store) return json_reply(200, to_json(MetricsReport{}));
    return json_reply(200, to_json(deps_.store->relevance(query_id)));
  } catch (const UnknownSession& e) {
    return error_reply(404, e);
  }
}

HttpReply Service::health() const {
  auto status = [](bool external) { return external ? "external" : "fallback"; };
  json body{{"status", "ok"},
            {"build", {{"version", kVersion}, {"stopwords", kStopwordsVersion}, {"stem_table", kStemTableVersion}}},
            {"graph_version", deps_.graph_version},
            {"graph_concepts", deps_.graph ? deps_.graph->size() : 0},
            {"providers",
             {{"ner", status(deps_.ner != nullptr)},
              {"mlm", status(deps_.mask != nullptr)},
              {"embedding", status(deps_.embedder && !deps_.embedder->is_fallback())}}},
            {"entrez", deps_.entrez ? json(deps_.entrez->config().base_url) : json(nullptr)},
            {"quarantined_log_lines", deps_.store ? deps_.store->quarantined() : 0}};
  return json_reply(200, body);
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(Service& s) : service(s) {
    auto send = [](httplib::Response& res, const HttpReply& reply) {
      res.status = reply.status;
      if (!reply.body.empty()) res.set_content(reply.body, reply.content_type);
    };
    server.Post("/api/search", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, service.search(req.body));
    });
    server.Get(R"(/api/session/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, service.session(req.matches[1]));
    });
    server.Post("/api/feedback", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, service.feedback(req.body));
    });
    server.Get("/api/metrics", [this, send](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::string> scope;
      if (req.has_param("query_id")) scope = req.get_param_value("query_id");
      send(res, service.metrics(scope));
    });
    server.Get("/api/health", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, service.health());
    });
    if (service.config().static_dir) server.set_mount_point("/", service.config().static_dir->string());
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw StorageError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace sysrev
