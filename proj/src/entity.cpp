#include "sysrev/entity.hpp"

#include <algorithm>
#include <unordered_set>

#include "sysrev/error.hpp"
#include "sysrev/text.hpp"

namespace sysrev {
namespace {

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Content-word heuristic for unmatched tokens. Long "-ing" forms are treated
// as verbal ("affirming", "comparing") and dropped.
bool is_content_token(std::string_view tok) {
  if (tok.size() < 2 || all_digits(tok) || is_stopword(tok)) return false;
  if (tok.size() >= 6 && tok.ends_with("ing")) return false;
  return true;
}

class SurfaceSet {
 public:
  bool insert(std::string_view surface) { return seen_.insert(normalize_label(surface)).second; }

 private:
  std::unordered_set<std::string> seen_;
};

}  // namespace

bool is_stopword(std::string_view lowercase_token) {
  return std::find(kStopwords.begin(), kStopwords.end(), lowercase_token) != kStopwords.end();
}

std::vector<Entity> match_dictionary(std::string_view text, const ConceptGraph& graph, Origin origin) {
  auto tokens = tokenize(text);
  std::vector<Entity> out;
  SurfaceSet seen;
  const std::size_t max_len = std::max<std::size_t>(1, graph.max_label_tokens());

  std::size_t i = 0;
  while (i < tokens.size()) {
    bool matched = false;
    for (std::size_t len = std::min(max_len, tokens.size() - i); len >= 1; --len) {
      auto start = tokens[i].start;
      auto end = tokens[i + len - 1].end;
      auto surface = text.substr(start, end - start);
      if (const Concept* c = graph.lookup(surface)) {
        if (seen.insert(surface)) out.push_back(Entity{std::string(surface), c->id, origin, 1.0});
        i += len;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (is_content_token(tokens[i].text)) {
      auto surface = text.substr(tokens[i].start, tokens[i].end - tokens[i].start);
      if (seen.insert(surface)) out.push_back(Entity{std::string(surface), std::nullopt, origin, 1.0});
    }
    ++i;
  }
  return out;
}

std::vector<Entity> extract_entities(std::string_view text, const ConceptGraph& graph, Origin origin,
                                     NerProvider* provider) {
  if (provider == nullptr) return match_dictionary(text, graph, origin);

  std::vector<NerSpan> spans;
  try {
    spans = provider->find(text);
  } catch (const ProviderUnavailable&) {
    return match_dictionary(text, graph, origin);
  }

  std::sort(spans.begin(), spans.end(), [](const NerSpan& a, const NerSpan& b) {
    return a.start != b.start ? a.start < b.start : a.end > b.end;
  });
  std::vector<Entity> out;
  SurfaceSet seen;
  std::size_t covered_to = 0;
  for (const auto& span : spans) {
    if (span.end > text.size() || span.start >= span.end || span.start < covered_to) continue;
    auto surface = text.substr(span.start, span.end - span.start);
    if (normalize_label(surface).empty() || !seen.insert(surface)) continue;
    const Concept* c = graph.lookup(surface);
    out.push_back(Entity{std::string(surface), c ? std::optional<std::string>(c->id) : std::nullopt, origin, 1.0});
    covered_to = span.end;
  }
  return out;
}

std::vector<Entity> merge_entities(const std::vector<Entity>& query_entities,
                                   const std::vector<Entity>& sentinel_entities) {
  std::vector<Entity> out;
  SurfaceSet seen;
  for (const auto* list : {&query_entities, &sentinel_entities})
    for (const auto& e : *list)
      if (seen.insert(e.surface)) out.push_back(e);
  return out;
}

}  // namespace sysrev
