#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sysrev/embedding.hpp"
#include "sysrev/entity.hpp"
#include "sysrev/query.hpp"
#include "sysrev/retrieval.hpp"

namespace sysrev {

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

struct RankedArticle {
  Article article;
  double score_percent = 0.0;    // [0, 100], two decimals
  std::vector<Span> highlights;  // byte spans in article.abstract, sorted, disjoint
};

/// round(100 * max(0, similarity), 2)
double score_percent(double similarity);

/// Where the [tiab] terms occur in `text`, merged into disjoint spans.
std::vector<Span> highlight_spans(std::string_view text, std::span<const TaggedTerm> terms);

/// Scores every article (title + abstract) against the normalized mean of
/// the query and sentinel embeddings and keeps the top k, ordered by score
/// descending then external id ascending. Article vectors are cached in
/// `store` when one is given.
std::vector<RankedArticle> rerank(const std::vector<Article>& articles, std::string_view query,
                                  std::span<const SentinelArticle> sentinels, std::size_t k, Embedder& embedder,
                                  std::span<const TaggedTerm> highlight_terms = {}, VectorStore* store = nullptr);

}  // namespace sysrev
