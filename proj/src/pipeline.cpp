#include "sysrev/pipeline.hpp"

#include <chrono>
#include <random>
#include <set>

#include "sysrev/http_providers.hpp"
#include "sysrev/json_io.hpp"
#include "sysrev/query.hpp"
#include "sysrev/text.hpp"

namespace sysrev {
namespace {

using nlohmann::json;

std::size_t positive_int(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  const auto& v = j[key];
  if (!v.is_number_integer() || v.get<long long>() < 1) throw ValidationError(key, "must be an integer >= 1");
  return v.get<std::size_t>();
}

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out) {}

  template <typename F>
  auto run(const std::string& stage, F&& f) {
    auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
      out_.push_back(StageTiming{
          stage, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()});
    };
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        finish();
      } else {
        auto r = f();
        finish();
        return r;
      }
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(stage, e);
    } catch (const std::exception& e) {
      throw StageError(stage, Error("InternalError", e.what()));
    }
  }

 private:
  std::vector<StageTiming>& out_;
};

}  // namespace

void validate(const SearchRequest& r) {
  if (normalize_label(r.query).empty()) throw ValidationError("query", "must be non-empty");
  if (r.k < 1) throw ValidationError("k", "must be at least 1");
  if (r.n_min < 1) throw ValidationError("n_min", "must be at least 1");
  for (const auto& s : r.sentinels)
    if (normalize_label(s.title).empty()) throw ValidationError("sentinels.title", "must be non-empty");
  if (r.backend.kind == BackendKind::Local && r.backend.corpus.empty())
    throw ValidationError("backend.corpus", "a LOCAL backend needs a corpus path");
}

SearchRequest request_from_json(const json& j, const Config& config) {
  if (!j.is_object()) throw ValidationError("request", "must be a JSON object");
  SearchRequest r;
  if (!j.contains("query") || !j["query"].is_string()) throw ValidationError("query", "must be a non-empty string");
  r.query = j["query"].get<std::string>();
  if (j.contains("sentinels") && !j["sentinels"].is_null()) {
    if (!j["sentinels"].is_array()) throw ValidationError("sentinels", "must be an array");
    for (const auto& s : j["sentinels"]) r.sentinels.push_back(sentinel_from_json(s));
  }
  r.k = positive_int(j, "k", config.k);
  r.n_min = positive_int(j, "n_min", config.n_min);

  r.backend.kind = config.corpus_path ? BackendKind::Local : BackendKind::Remote;
  if (config.corpus_path) r.backend.corpus = *config.corpus_path;
  if (j.contains("backend") && !j["backend"].is_null()) {
    const auto& b = j["backend"];
    std::string type;
    if (b.is_string()) {
      type = b.get<std::string>();
    } else if (b.is_object() && b.contains("type") && b["type"].is_string()) {
      type = b["type"].get<std::string>();
    } else {
      throw ValidationError("backend", "must be \"remote\", \"local\" or {\"type\", \"corpus\"}");
    }
    type = to_lower(type);
    if (type == "remote") {
      r.backend = BackendChoice{BackendKind::Remote, {}};
    } else if (type == "local") {
      r.backend.kind = BackendKind::Local;
      if (b.is_object() && b.contains("corpus")) {
        if (!b["corpus"].is_string()) throw ValidationError("backend.corpus", "must be a string");
        r.backend.corpus = b["corpus"].get<std::string>();
      }
    } else {
      throw ValidationError("backend", "unknown backend '" + type + "'");
    }
  }
  validate(r);
  return r;
}

json to_json(const SearchRequest& r) {
  json sentinels = json::array();
  for (const auto& s : r.sentinels) sentinels.push_back(to_json(s));
  json backend = r.backend.kind == BackendKind::Remote ? json{{"type", "remote"}}
                                                       : json{{"type", "local"}, {"corpus", r.backend.corpus.string()}};
  return json{{"query", r.query}, {"sentinels", sentinels}, {"k", r.k}, {"n_min", r.n_min}, {"backend", backend}};
}

json to_json(const SearchResponse& r) {
  json entities = json::array();
  for (const auto& e : r.entities) entities.push_back(to_json(e));
  json results = json::array();
  for (const auto& a : r.results) results.push_back(to_json(a));
  json timing = json::object();
  for (const auto& t : r.timing) timing[t.stage] = t.milliseconds;
  return json{{"query_id", r.query_id},
              {"rendered_query", r.rendered_query},
              {"hit_count", r.hit_count},
              {"entities", entities},
              {"trace", to_json(r.trace)},
              {"results", results},
              {"missing_ids", r.missing_ids},
              {"timing_ms", timing}};
}

std::shared_ptr<const Corpus> CorpusCache::get(const std::filesystem::path& path) {
  std::lock_guard lock(mu_);
  auto key = std::filesystem::weakly_canonical(path);
  auto it = corpora_.find(key);
  if (it != corpora_.end()) return it->second;
  auto corpus = std::make_shared<const Corpus>(Corpus::load(path));
  corpora_.emplace(key, corpus);
  return corpus;
}

std::string random_query_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}() ^
                                          static_cast<std::uint64_t>(
                                              std::chrono::high_resolution_clock::now().time_since_epoch().count())};
  return hex64(rng()) + hex64(rng());
}

Dependencies make_dependencies(const Config& config, bool persist) {
  Dependencies d;
  d.graph = std::make_shared<const ConceptGraph>(ConceptGraph::load(config.graph_path));
  d.graph_version = d.graph->version();
  if (config.embedding_url) {
    d.embedder = std::make_shared<HttpEmbedder>(*config.embedding_url);
  } else {
    d.embedder = std::make_shared<HashedBagEmbedder>();
  }
  if (config.ner_url) d.ner = std::make_shared<HttpNerProvider>(*config.ner_url);
  if (config.mlm_url) d.mask = std::make_shared<HttpMaskProvider>(*config.mlm_url);
  d.entrez = std::make_shared<EntrezClient>(config.entrez);
  if (persist) d.store = std::make_shared<FeedbackStore>(config.data_dir);
  d.expansion = ExpansionConfig{config.threshold, config.max_mask_terms, 2};
  d.retmax = config.retmax;
  d.config_snapshot = to_json(config);
  return d;
}

std::vector<Entity> select_sentinel_entities(const std::vector<Entity>& query_entities,
                                             const std::vector<Entity>& sentinel_entities) {
  std::set<std::string> covered;
  for (const auto& e : query_entities)
    if (e.concept_id) covered.insert(*e.concept_id);
  std::vector<Entity> out;
  for (const auto& e : sentinel_entities) {
    if (!e.concept_id || !covered.insert(*e.concept_id).second) continue;
    out.push_back(e);
  }
  return out;
}

SearchResponse run_search(const SearchRequest& request, Dependencies& deps) {
  validate(request);
  if (!deps.graph || !deps.embedder) throw Error("NotInitialized", "pipeline dependencies are not initialized");

  SearchResponse response;
  response.query_id = deps.new_query_id ? deps.new_query_id() : random_query_id();
  StageClock clock(response.timing);
  const auto& graph = *deps.graph;

  auto [query_entities, sentinel_entities] = clock.run("extract", [&] {
    auto q = extract_entities(request.query, graph, Origin::Query, deps.ner.get());
    std::vector<Entity> s;
    for (const auto& sentinel : request.sentinels) {
      auto found = extract_entities(sentinel.text(), graph, Origin::Sentinel, deps.ner.get());
      s.insert(s.end(), found.begin(), found.end());
    }
    return std::pair{q, s};
  });

  auto entities = clock.run("merge", [&] {
    auto merged = merge_entities(query_entities, select_sentinel_entities(query_entities, sentinel_entities));
    if (merged.empty()) throw EmptyExpansion("no key terms found in the query");
    return merged;
  });

  auto expansion = clock.run("expand", [&] {
    return build_expansion(entities, graph, *deps.embedder, deps.mask.get(), request.query, request.sentinels,
                           deps.expansion);
  });

  clock.run("relevance", [&] { entity_relevance(expansion, *deps.embedder); });
  for (const auto& entry : expansion.entries) response.entities.push_back(entry.entity);

  auto refined = clock.run("refine", [&] {
    std::unique_ptr<SearchBackend> backend;
    if (request.backend.kind == BackendKind::Local) {
      backend = std::make_unique<LocalBackend>(deps.corpora->get(request.backend.corpus));
    } else {
      if (!deps.entrez) throw ProviderUnavailable("no Entrez client configured");
      backend = std::make_unique<RemoteBackend>(deps.entrez);
    }
    return refine_until(expansion, *backend, request.n_min, deps.retmax);
  });
  response.rendered_query = refined.rendered;
  response.hit_count = refined.trace.iterations.back().hit_count;
  response.trace = refined.trace;
  response.missing_ids = refined.missing;

  response.results = clock.run("rerank", [&] {
    std::vector<TaggedTerm> terms;
    for (const auto& g : refined.query.groups) terms.insert(terms.end(), g.begin(), g.end());
    return rerank(refined.articles, request.query, request.sentinels, request.k, *deps.embedder, terms);
  });

  if (deps.store) {
    clock.run("persist", [&] {
      QuerySession session;
      session.query_id = response.query_id;
      session.query_text = request.query;
      session.sentinels = request.sentinels;
      session.rendered_query = response.rendered_query;
      for (const auto& r : response.results) {
        session.ranked_article_ids.push_back(r.article.external_id);
        session.results.push_back(to_json(r));
      }
      session.created = now_utc();
      session.replay = json{{"request", to_json(request)},
                            {"graph_version", deps.graph_version},
                            {"embedder", deps.embedder->name()},
                            {"config", deps.config_snapshot}};
      deps.store->record_session(session);
    });
  }
  return response;
}

}  // namespace sysrev
