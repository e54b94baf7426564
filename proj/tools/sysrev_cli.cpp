// sysrev - command-line front end.
//
//   sysrev ingest-kg <graph.jsonl> --out <canonical.jsonl>
//   sysrev search --query "..." [--sentinel-file s.jsonl] (--corpus c.jsonl | --remote) [--k 5] [--n-min 20] [--json]
//   sysrev eval --requests r.jsonl --judgments j.jsonl
//   sysrev serve --config config.json
//
// Failures exit non-zero with a JSON error object on stderr.

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sysrev/config.hpp"
#include "sysrev/error.hpp"
#include "sysrev/feedback.hpp"
#include "sysrev/json_io.hpp"
#include "sysrev/kg_store.hpp"
#include "sysrev/pipeline.hpp"
#include "sysrev/service.hpp"

namespace {

using nlohmann::json;
using namespace sysrev;

json error_payload(const Error& e) {
  json j{{"error", e.kind()}, {"message", e.what()}};
  if (auto* d = dynamic_cast<const DanglingEdge*>(&e)) {
    j["source"] = d->source();
    j["target"] = d->target();
  } else if (auto* m = dynamic_cast<const MalformedLine*>(&e)) {
    j["line"] = m->line_no();
  } else if (auto* dup = dynamic_cast<const DuplicateId*>(&e)) {
    j["id"] = dup->id();
  } else if (auto* v = dynamic_cast<const ValidationError*>(&e)) {
    j["field"] = v->field();
  } else if (auto* s = dynamic_cast<const StageError*>(&e)) {
    j["stage"] = s->stage();
  }
  return j;
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open " + path);
  std::vector<json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedLine(line_no, path + ": not valid JSON");
    out.push_back(std::move(j));
  }
  return out;
}

int ingest_kg(const std::string& input, const std::string& out_path) {
  auto graph = ConceptGraph::load(input);
  auto version = graph.version();
  {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write " + out_path);
    out << graph.to_jsonl();
  }
  std::ofstream(out_path + ".version", std::ios::trunc) << version << '\n';
  std::cout << json{{"concepts", graph.size()}, {"edges", graph.edges().size()}, {"version", version}, {"out", out_path}}.dump()
            << '\n';
  return 0;
}

struct SearchArgs {
  std::string config_path;
  std::string graph;
  std::string query;
  std::string sentinel_file;
  std::string corpus;
  std::string data_dir;
  bool remote = false;
  std::size_t k = 0;
  std::size_t n_min = 0;
  bool as_json = false;
};

int search(const SearchArgs& a) {
  Config config = a.config_path.empty() ? Config{} : load_config(a.config_path);
  apply_env_overrides(config);
  if (!a.graph.empty()) config.graph_path = a.graph;
  if (config.graph_path.empty()) throw ValidationError("graph", "pass --graph or set it in --config");

  auto deps = make_dependencies(config, false);
  if (!a.data_dir.empty()) deps.store = std::make_shared<FeedbackStore>(a.data_dir);

  json req{{"query", a.query}};
  if (!a.sentinel_file.empty()) {
    json sentinels = json::array();
    for (auto& s : read_jsonl(a.sentinel_file)) sentinels.push_back(std::move(s));
    req["sentinels"] = sentinels;
  }
  if (a.k > 0) req["k"] = a.k;
  if (a.n_min > 0) req["n_min"] = a.n_min;
  if (a.remote) {
    req["backend"] = "remote";
  } else if (!a.corpus.empty()) {
    req["backend"] = json{{"type", "local"}, {"corpus", a.corpus}};
  }

  auto response = run_search(request_from_json(req, config), deps);
  if (a.as_json) {
    std::cout << to_json(response).dump(2) << '\n';
    return 0;
  }
  std::cout << response.rendered_query << '\n';
  std::cout << "\nhits: " << response.hit_count << ", refinement steps: " << response.trace.iterations.size() << '\n';
  int rank = 1;
  for (const auto& r : response.results) {
    char score[16];
    std::snprintf(score, sizeof score, "%.2f", r.score_percent);
    std::cout << rank++ << ". [" << score << "] " << r.article.title << " (" << r.article.external_id << ")\n";
  }
  return 0;
}

int eval(const std::string& requests_path, const std::string& judgments_path) {
  std::map<std::string, std::size_t> retrieved;
  for (const auto& r : read_jsonl(requests_path)) {
    if (!r.contains("query_id") || !r["query_id"].is_string()) throw ValidationError("query_id", "missing in requests file");
    std::size_t n = r.contains("retrieved") && r["retrieved"].is_array() ? r["retrieved"].size() : 0;
    retrieved[r["query_id"].get<std::string>()] = n;
  }
  std::map<std::pair<std::string, std::string>, FeedbackRecord> latest;
  for (const auto& j : read_jsonl(judgments_path)) {
    auto rec = feedback_from_json(j);
    if (!retrieved.contains(rec.query_id)) throw UnknownSession(rec.query_id);
    latest.insert_or_assign(std::pair{rec.query_id, rec.article_id}, rec);
  }
  std::vector<FeedbackRecord> records;
  for (auto& [key, rec] : latest) records.push_back(rec);
  std::cout << to_json(compute_relevance(records, retrieved)).dump(2) << '\n';
  return 0;
}

HttpServer* g_server = nullptr;

int serve(const std::string& config_path, std::optional<int> port) {
  Config config = load_config(config_path);
  apply_env_overrides(config);
  if (port) config.port = *port;
  Service service(make_dependencies(config), config);
  HttpServer server(service);
  int bound = server.bind(config.host, config.port);
  std::cerr << json{{"listening", config.host + ":" + std::to_string(bound)}}.dump() << std::endl;
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Systematic-review search strategy builder"};
  app.require_subcommand(1);

  std::string kg_in, kg_out;
  auto* ingest = app.add_subcommand("ingest-kg", "Validate a concept graph and write its canonical, versioned form");
  ingest->add_option("graph", kg_in, "Graph JSONL")->required();
  ingest->add_option("--out", kg_out, "Canonical output path")->required();

  SearchArgs sa;
  auto* search_cmd = app.add_subcommand("search", "Build, refine and run a search; print the response");
  search_cmd->add_option("--config", sa.config_path, "Config file");
  search_cmd->add_option("--graph", sa.graph, "Graph JSONL (overrides config)");
  search_cmd->add_option("--query", sa.query, "Research question")->required();
  search_cmd->add_option("--sentinel-file", sa.sentinel_file, "Sentinel articles, JSONL {title, abstract, source_id}");
  auto* corpus_opt = search_cmd->add_option("--corpus", sa.corpus, "Offline corpus JSONL");
  auto* remote_flag = search_cmd->add_flag("--remote", sa.remote, "Query PubMed through E-utilities");
  corpus_opt->excludes(remote_flag);
  search_cmd->add_option("--k", sa.k, "Results to keep (default 5)");
  search_cmd->add_option("--n-min", sa.n_min, "Minimum hits before widening stops (default 20)");
  search_cmd->add_option("--data-dir", sa.data_dir, "Persist the session under this directory");
  search_cmd->add_flag("--json", sa.as_json, "Print the full SearchResponse as JSON");

  std::string requests, judgments;
  auto* eval_cmd = app.add_subcommand("eval", "Compute Relevance% from librarian judgments");
  eval_cmd->add_option("--requests", requests, "Queries JSONL {query_id, retrieved}")->required();
  eval_cmd->add_option("--judgments", judgments, "Feedback records JSONL")->required();

  std::string config_path;
  std::optional<int> port;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", config_path, "Config file")->required();
  serve_cmd->add_option("--port", port, "Override the configured port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest) return ingest_kg(kg_in, kg_out);
    if (*search_cmd) return search(sa);
    if (*eval_cmd) return eval(requests, judgments);
    if (*serve_cmd) return serve(config_path, port);
  } catch (const Error& e) {
    std::cerr << error_payload(e).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 1;
}
