#include "sysrev/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <unordered_set>

#include "sysrev/error.hpp"
#include "sysrev/text.hpp"

namespace sysrev {
namespace {

// Byte span of `needle` in `haystack`, case-insensitive.
std::optional<std::pair<std::size_t, std::size_t>> find_span(std::string_view haystack, std::string_view needle) {
  auto h = to_lower(haystack);
  auto pos = h.find(to_lower(needle));
  if (pos == std::string::npos || needle.empty()) return std::nullopt;
  return std::pair{pos, pos + needle.size()};
}

}  // namespace

std::vector<KgTerm> vocabulary_extension(const Entity& entity, const ConceptGraph& graph, Embedder& embedder,
                                         const Vector& context, double threshold, int max_hops) {
  if (!(threshold >= -1.0 && threshold <= 1.0)) throw ValidationError("threshold", "must lie in [-1, 1]");
  if (!entity.concept_id || graph.find(*entity.concept_id) == nullptr) return {};

  std::unordered_set<std::string> seen{normalize_label(entity.surface)};
  std::vector<KgTerm> candidates;
  for (const Concept* c : graph.neighbors(*entity.concept_id, max_hops)) {
    auto add = [&](const std::string& label) {
      if (seen.insert(normalize_label(label)).second) candidates.push_back(KgTerm{label, c->tag, 0.0});
    };
    add(c->preferred_label);
    for (const auto& s : c->synonyms) add(s);
  }

  std::vector<KgTerm> kept;
  for (auto& cand : candidates) {
    cand.similarity = cosine(embedder.embed(cand.label), context);
    if (cand.similarity >= threshold) kept.push_back(std::move(cand));
  }
  std::sort(kept.begin(), kept.end(), [](const KgTerm& a, const KgTerm& b) {
    return a.similarity != b.similarity ? a.similarity > b.similarity : a.label < b.label;
  });
  return kept;
}

std::vector<std::string> mask_substitutes(const Entity& entity, std::string_view context_text,
                                          const ConceptGraph& graph, MaskedTermProvider* provider,
                                          std::size_t max_terms) {
  if (max_terms == 0) return {};

  std::optional<std::vector<std::string>> proposed;
  if (provider != nullptr) {
    std::string text(context_text);
    auto span = find_span(text, entity.surface);
    if (!span) {
      if (!text.empty()) text += ' ';
      span = std::pair{text.size(), text.size() + entity.surface.size()};
      text += entity.surface;
    }
    try {
      proposed = provider->fill(text, span->first, span->second, max_terms);
    } catch (const ProviderUnavailable&) {
      proposed.reset();
    }
  }
  if (!proposed) {
    const Concept* c = entity.concept_id ? graph.find(*entity.concept_id) : nullptr;
    if (c == nullptr) return {};
    proposed = c->synonyms;
  }

  std::unordered_set<std::string> seen{normalize_label(entity.surface)};
  std::vector<std::string> out;
  for (auto& term : *proposed) {
    if (out.size() == max_terms) break;
    auto key = normalize_label(term);
    if (key.empty() || !seen.insert(key).second) continue;
    out.push_back(std::move(term));
  }
  return out;
}

Vector context_embedding(Embedder& embedder, std::string_view query, std::span<const SentinelArticle> sentinels) {
  std::vector<Vector> parts{embedder.embed(query)};
  for (const auto& s : sentinels) parts.push_back(embedder.embed(s.text()));
  if (parts.size() == 1 && (parts.front().is_zero() || std::abs(parts.front().norm() - 1.0) < 1e-12))
    return parts.front();
  return normalized_mean(parts);
}

ExpansionSet build_expansion(const std::vector<Entity>& entities, const ConceptGraph& graph, Embedder& embedder,
                             MaskedTermProvider* mask_provider, std::string_view query,
                             std::span<const SentinelArticle> sentinels, const ExpansionConfig& config) {
  if (entities.empty()) throw EmptyExpansion("no entities to expand");

  ExpansionSet exp;
  exp.context_embedding = context_embedding(embedder, query, sentinels);
  exp.entries.reserve(entities.size());
  for (const auto& e : entities) {
    std::string_view context_text = query;
    if (!find_span(query, e.surface)) {
      for (const auto& s : sentinels) {
        if (find_span(s.title, e.surface)) { context_text = s.title; break; }
        if (find_span(s.abstract, e.surface)) { context_text = s.abstract; break; }
      }
    }
    ExpansionEntry entry{e, {}, {}};
    entry.kg_terms =
        vocabulary_extension(e, graph, embedder, exp.context_embedding, config.threshold, config.max_hops);
    entry.mask_terms = mask_substitutes(e, context_text, graph, mask_provider, config.max_mask_terms);
    exp.entries.push_back(std::move(entry));
  }
  return exp;
}

}  // namespace sysrev
