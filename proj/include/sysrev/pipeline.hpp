#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sysrev/config.hpp"
#include "sysrev/embedding.hpp"
#include "sysrev/entity.hpp"
#include "sysrev/entrez.hpp"
#include "sysrev/error.hpp"
#include "sysrev/expansion.hpp"
#include "sysrev/feedback.hpp"
#include "sysrev/kg_store.hpp"
#include "sysrev/refinement.hpp"
#include "sysrev/rerank.hpp"

namespace sysrev {

inline constexpr std::string_view kVersion = "0.1.0";

enum class BackendKind { Remote, Local };

struct BackendChoice {
  BackendKind kind = BackendKind::Local;
  std::filesystem::path corpus;  // LOCAL only
};

struct SearchRequest {
  std::string query;
  std::vector<SentinelArticle> sentinels;
  std::size_t k = 5;
  std::size_t n_min = 20;
  BackendChoice backend;
};

/// Throws ValidationError naming the first offending field.
void validate(const SearchRequest& request);

/// Missing fields take their defaults from `config`.
SearchRequest request_from_json(const nlohmann::json& j, const Config& config);
nlohmann::json to_json(const SearchRequest& request);

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct SearchResponse {
  std::string query_id;
  std::string rendered_query;
  std::size_t hit_count = 0;
  std::vector<Entity> entities;  // after relevance scoring, merged order
  RefinementTrace trace;
  std::vector<RankedArticle> results;
  std::vector<std::string> missing_ids;
  std::vector<StageTiming> timing;
};

nlohmann::json to_json(const SearchResponse& response);

/// A pipeline failure tagged with the stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)), backend_failure_(
            dynamic_cast<const BackendError*>(&cause) != nullptr) {
    if (auto* r = dynamic_cast<const RefinementError*>(&cause)) trace_ = r->trace();
  }
  const std::string& stage() const noexcept { return stage_; }
  bool backend_failure() const noexcept { return backend_failure_; }
  const RefinementTrace& trace() const noexcept { return trace_; }

 private:
  std::string stage_;
  bool backend_failure_;
  RefinementTrace trace_;
};

/// Loaded corpora keyed by path; each file is indexed once.
class CorpusCache {
 public:
  std::shared_ptr<const Corpus> get(const std::filesystem::path& path);

 private:
  std::mutex mu_;
  std::map<std::filesystem::path, std::shared_ptr<const Corpus>> corpora_;
};

/// Everything run_search needs. Providers left null use the built-in
/// fallbacks (dictionary NER, graph-synonym substitutes); the embedder is
/// required.
struct Dependencies {
  std::shared_ptr<const ConceptGraph> graph;
  std::string graph_version;
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<NerProvider> ner;
  std::shared_ptr<MaskedTermProvider> mask;
  std::shared_ptr<EntrezClient> entrez;
  std::shared_ptr<FeedbackStore> store;  // null: sessions are not persisted
  std::shared_ptr<CorpusCache> corpora = std::make_shared<CorpusCache>();
  ExpansionConfig expansion;
  std::size_t retmax = 100;
  nlohmann::json config_snapshot = nlohmann::json::object();
  std::function<std::string()> new_query_id;
};

/// Wires graph, providers, Entrez client and (when `persist`) the store.
Dependencies make_dependencies(const Config& config, bool persist = true);

/// Random 128-bit hex id.
std::string random_query_id();

/// Sentinel-derived entities that add something to the query: anchored to a
/// graph concept that no query entity already covers.
std::vector<Entity> select_sentinel_entities(const std::vector<Entity>& query_entities,
                                             const std::vector<Entity>& sentinel_entities);

/// extract -> merge -> expand -> score -> refine -> rerank -> persist.
/// Throws ValidationError before any stage runs, StageError afterwards.
SearchResponse run_search(const SearchRequest& request, Dependencies& deps);

}  // namespace sysrev
