#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sysrev/embedding.hpp"
#include "sysrev/entity.hpp"
#include "sysrev/field_tag.hpp"
#include "sysrev/kg_store.hpp"

namespace sysrev {

struct KgTerm {
  std::string label;
  FieldTag tag = FieldTag::Tiab;
  double similarity = 0.0;

  bool operator==(const KgTerm&) const = default;
};

struct ExpansionEntry {
  Entity entity;
  std::vector<KgTerm> kg_terms;          // graph neighbours that passed the semantic filter
  std::vector<std::string> mask_terms;   // masked-term substitutes
};

/// Per-entity expansion bundles in merged entity order, plus the
/// query + sentinel centroid they were filtered against.
struct ExpansionSet {
  std::vector<ExpansionEntry> entries;
  Vector context_embedding;
};

/// Proposes substitutes for the span [mask_start, mask_end) of `text`.
/// Throws ProviderUnavailable on failure.
class MaskedTermProvider {
 public:
  virtual ~MaskedTermProvider() = default;
  virtual std::vector<std::string> fill(std::string_view text, std::size_t mask_start, std::size_t mask_end,
                                        std::size_t top_k) = 0;
  virtual std::string name() const = 0;
};

struct ExpansionConfig {
  double threshold = 0.5;
  std::size_t max_mask_terms = 3;
  int max_hops = 2;
};

/// Labels and synonyms of concepts within `max_hops` of the entity's concept
/// whose cosine to `context` is at least `threshold`, most similar first
/// (ties lexicographic). Unresolved entities yield nothing.
std::vector<KgTerm> vocabulary_extension(const Entity& entity, const ConceptGraph& graph, Embedder& embedder,
                                         const Vector& context, double threshold, int max_hops = 2);

/// Up to `max_terms` substitutes for the entity. Uses `provider` when given
/// and reachable, otherwise the concept's graph synonyms in declared order.
/// Never throws for provider trouble; an unresolvable entity gets nothing.
std::vector<std::string> mask_substitutes(const Entity& entity, std::string_view context_text,
                                          const ConceptGraph& graph, MaskedTermProvider* provider,
                                          std::size_t max_terms);

/// normalized_mean(embed(query), embed(sentinel text)...).
Vector context_embedding(Embedder& embedder, std::string_view query, std::span<const SentinelArticle> sentinels);

/// Throws EmptyExpansion for no entities; propagates ProviderUnavailable.
ExpansionSet build_expansion(const std::vector<Entity>& entities, const ConceptGraph& graph, Embedder& embedder,
                             MaskedTermProvider* mask_provider, std::string_view query,
                             std::span<const SentinelArticle> sentinels, const ExpansionConfig& config = {});

}  // namespace sysrev
