#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sysrev/kg_store.hpp"

namespace sysrev {

enum class Origin { Query, Sentinel };

/// A key term pulled out of the query or a sentinel article.
struct Entity {
  std::string surface;                    // as written in the input
  std::optional<std::string> concept_id;  // set when the surface is a graph label
  Origin origin = Origin::Query;
  double relevance = 1.0;                 // filled in by entity_relevance()

  bool operator==(const Entity&) const = default;
};

struct SentinelArticle {
  std::string title;
  std::string abstract;
  std::optional<std::string> source_id;

  std::string text() const { return abstract.empty() ? title : title + " " + abstract; }
};

/// Shipped stopword list, mirrored in data/stopwords.txt.
inline constexpr std::string_view kStopwordsVersion = "v1";
inline constexpr std::array<std::string_view, 60> kStopwords = {
    "a", "about", "after", "against", "all", "among", "an", "and", "any", "are", "as", "at", "be", "been", "between", "both", "but", "by", "can", "do", "does", "during", "each", "for", "from", "has", "have", "how", "if", "in", "into", "is", "it", "its", "may", "no", "not", "of", "on", "or", "other", "than", "that", "the", "their", "these", "this", "those", "to", "using", "versus", "via", "vs", "was", "were", "what", "which", "with", "within", "without"};

bool is_stopword(std::string_view lowercase_token);

struct NerSpan {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;
};

/// Pluggable named-entity recognizer. Implementations throw
/// ProviderUnavailable on failure; callers then use the dictionary matcher.
class NerProvider {
 public:
  virtual ~NerProvider() = default;
  virtual std::vector<NerSpan> find(std::string_view text) = 0;
  virtual std::string name() const = 0;
};

/// Longest-match, left-to-right dictionary matching against graph labels.
/// Tokens that match nothing and look like content words become entities
/// without a concept. Output follows text order, deduplicated by normalized
/// surface. When `provider` is given and answers, its spans are used instead.
std::vector<Entity> extract_entities(std::string_view text, const ConceptGraph& graph, Origin origin,
                                     NerProvider* provider = nullptr);

/// The dictionary matcher alone.
std::vector<Entity> match_dictionary(std::string_view text, const ConceptGraph& graph, Origin origin);

/// Union, deduplicated by normalized surface. Query entities come first and
/// win on conflict.
std::vector<Entity> merge_entities(const std::vector<Entity>& query_entities,
                                   const std::vector<Entity>& sentinel_entities);

}  // namespace sysrev
