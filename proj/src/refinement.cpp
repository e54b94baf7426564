#include "sysrev/refinement.hpp"

#include <stdexcept>

namespace sysrev {

void entity_relevance(ExpansionSet& exp, Embedder& embedder) {
  for (auto& entry : exp.entries) {
    double c = cosine(embedder.embed(entry.entity.surface), exp.context_embedding);
    entry.entity.relevance = (c + 1.0) / 2.0;
  }
}

RefinementResult refine_until(const ExpansionSet& exp, SearchBackend& backend, std::size_t n_min,
                              std::size_t retmax) {
  if (n_min < 1) throw ValidationError("n_min", "must be at least 1");
  if (exp.entries.empty()) throw EmptyExpansion();

  ExpansionSet current = exp;
  RefinementResult result;
  SearchHits hits;
  for (;;) {
    RefinementStep step;
    step.query = build_specific_query(current);
    step.rendered = render(step.query);
    try {
      hits = backend.search(step.query, retmax);
    } catch (const BackendError& e) {
      throw RefinementError(e, result.trace);
    }
    step.hit_count = hits.count;
    result.trace.iterations.push_back(std::move(step));

    if (hits.count >= n_min || current.entries.size() <= 1) break;

    std::size_t victim = 0;
    for (std::size_t i = 1; i < current.entries.size(); ++i)
      if (current.entries[i].entity.relevance <= current.entries[victim].entity.relevance) victim = i;
    result.trace.iterations.back().removed_entity = current.entries[victim].entity;
    current.entries.erase(current.entries.begin() + static_cast<std::ptrdiff_t>(victim));
  }

  result.query = result.trace.iterations.back().query;
  result.rendered = result.trace.iterations.back().rendered;
  for (const auto& entry : current.entries) result.surviving_entities.push_back(entry.entity);
  if (!hits.ids.empty()) {
    try {
      auto fetched = backend.fetch(hits.ids);
      result.articles = std::move(fetched.articles);
      result.missing = std::move(fetched.missing);
    } catch (const BackendError& e) {
      throw RefinementError(e, result.trace);
    }
  }
  return result;
}

}  // namespace sysrev
