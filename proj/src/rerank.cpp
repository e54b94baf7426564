#include "sysrev/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "sysrev/error.hpp"
#include "sysrev/expansion.hpp"
#include "sysrev/text.hpp"

namespace sysrev {

double score_percent(double similarity) {
  double pct = 100.0 * std::clamp(similarity, 0.0, 1.0);
  return std::round(pct * 100.0) / 100.0;
}

std::vector<Span> highlight_spans(std::string_view text, std::span<const TaggedTerm> terms) {
  auto tokens = tokenize(text);
  std::vector<Span> spans;
  for (const auto& term : terms) {
    if (term.tag != FieldTag::Tiab) continue;
    auto needle = token_texts(term.text);
    if (needle.empty() || needle.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
      bool ok = true;
      for (std::size_t k = 0; k < needle.size() && ok; ++k) {
        const auto& tok = tokens[i + k].text;
        bool last = k + 1 == needle.size();
        ok = (term.wildcard && last) ? std::string_view(tok).starts_with(needle[k]) : tok == needle[k];
      }
      if (ok) spans.push_back(Span{tokens[i].start, tokens[i + needle.size() - 1].end});
    }
  }
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.start != b.start ? a.start < b.start : a.end > b.end; });
  std::vector<Span> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && s.start < merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

std::vector<RankedArticle> rerank(const std::vector<Article>& articles, std::string_view query,
                                  std::span<const SentinelArticle> sentinels, std::size_t k, Embedder& embedder,
                                  std::span<const TaggedTerm> highlight_terms, VectorStore* store) {
  if (k < 1) throw ValidationError("k", "must be at least 1");
  Vector reference = context_embedding(embedder, query, sentinels);

  std::vector<RankedArticle> ranked;
  std::vector<std::pair<std::string, Vector>> fresh;
  std::unordered_set<std::string> seen;
  for (const auto& a : articles) {
    if (!seen.insert(a.external_id).second) continue;
    std::optional<Vector> vec = store ? store->get(a.external_id) : std::nullopt;
    if (!vec) {
      vec = embedder.embed(a.abstract.empty() ? a.title : a.title + " " + a.abstract);
      fresh.emplace_back(a.external_id, *vec);
    }
    ranked.push_back(RankedArticle{a, score_percent(cosine(*vec, reference)), {}});
  }
  if (store && !fresh.empty()) store->insert_batch(fresh);

  std::sort(ranked.begin(), ranked.end(), [](const RankedArticle& a, const RankedArticle& b) {
    if (a.score_percent != b.score_percent) return a.score_percent > b.score_percent;
    return a.article.external_id < b.article.external_id;
  });
  if (ranked.size() > k) ranked.resize(k);
  for (auto& r : ranked) r.highlights = highlight_spans(r.article.abstract, highlight_terms);
  return ranked;
}

}  // namespace sysrev
