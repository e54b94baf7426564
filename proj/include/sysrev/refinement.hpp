#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sysrev/embedding.hpp"
#include "sysrev/error.hpp"
#include "sysrev/expansion.hpp"
#include "sysrev/query.hpp"
#include "sysrev/retrieval.hpp"

namespace sysrev {

struct RefinementStep {
  BooleanQuery query;
  std::string rendered;
  std::size_t hit_count = 0;
  std::optional<Entity> removed_entity;  // dropped after this step; empty on the last
};

struct RefinementTrace {
  std::vector<RefinementStep> iterations;
};

struct RefinementResult {
  BooleanQuery query;
  std::string rendered;
  std::vector<Article> articles;
  std::vector<std::string> missing;  // ids the backend listed but could not fetch
  RefinementTrace trace;
  std::vector<Entity> surviving_entities;
};

/// A backend failure during refinement, carrying the steps completed so far.
class RefinementError : public BackendError {
 public:
  RefinementError(const BackendError& cause, RefinementTrace trace)
      : BackendError(cause.kind(), cause.status(), cause.body_excerpt()), trace_(std::move(trace)) {}
  const RefinementTrace& trace() const noexcept { return trace_; }

 private:
  RefinementTrace trace_;
};

/// relevance = (cosine(embed(surface), context) + 1) / 2 for every entry.
void entity_relevance(ExpansionSet& exp, Embedder& embedder);

/// Starts from the most specific query and, while fewer than `n_min` hits
/// come back and more than one entity survives, drops the least relevant
/// entity (the later one on ties) and retries. At most |E| searches, then
/// one fetch of up to `retmax` ids for the final query.
RefinementResult refine_until(const ExpansionSet& exp, SearchBackend& backend, std::size_t n_min,
                              std::size_t retmax = 100);

}  // namespace sysrev
