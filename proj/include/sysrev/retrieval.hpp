#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sysrev/query.hpp"

namespace sysrev {

struct Article {
  std::string external_id;
  std::string title;
  std::string abstract;
  std::vector<std::string> mesh_terms;
  std::optional<std::string> journal;

  bool operator==(const Article&) const = default;
};

/// Reference semantics for the query dialect, checked one article at a time.
/// [tiab] terms match title or abstract tokens case-insensitively: a phrase
/// must be contiguous within one field, a wildcard prefix-matches its last
/// token. [Mesh] terms match whole MeSH entries (prefix for wildcards).
bool evaluate(const BooleanQuery& query, const Article& article);
bool evaluate(const TaggedTerm& term, const Article& article);

/// Immutable, indexed article collection. Concurrent readers are safe.
class Corpus {
 public:
  Corpus() = default;

  /// Throws ValidationError on a duplicate id or an empty title.
  explicit Corpus(std::vector<Article> articles);

  /// JSONL: {"pmid": ..., "title": ..., "abstract": ..., "mesh": [...], "journal": ...}
  static Corpus load(const std::filesystem::path& path);
  static Corpus parse(std::istream& in);

  const std::vector<Article>& articles() const { return articles_; }
  const Article* find(const std::string& external_id) const;

  /// Indices of matching articles, ascending. Answers from the inverted
  /// indexes rather than scanning.
  std::vector<std::size_t> search(const BooleanQuery& query) const;

 private:
  struct Posting {
    std::size_t doc;
    int field;  // 0 title, 1 abstract
    std::size_t pos;
    auto operator<=>(const Posting&) const = default;
  };

  std::vector<std::size_t> match_term(const TaggedTerm& term) const;
  std::vector<Posting> postings_for(const std::string& token, bool prefix) const;

  std::vector<Article> articles_;
  std::map<std::string, std::size_t> by_id_;
  std::map<std::string, std::vector<Posting>> tiab_index_;
  std::map<std::string, std::vector<std::size_t>> mesh_index_;
};

/// Articles matching `query`, in corpus order.
std::vector<Article> local_search(const Corpus& corpus, const BooleanQuery& query);

struct SearchHits {
  std::size_t count = 0;          // total matches reported by the backend
  std::vector<std::string> ids;   // at most retmax, backend order
};

struct FetchResult {
  std::vector<Article> articles;     // input order
  std::vector<std::string> missing;  // ids the backend could not resolve
};

/// Where refinement sends its queries.
class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual SearchHits search(const BooleanQuery& query, std::size_t retmax) = 0;
  virtual FetchResult fetch(const std::vector<std::string>& ids) = 0;
  virtual std::string name() const = 0;
};

class LocalBackend final : public SearchBackend {
 public:
  explicit LocalBackend(std::shared_ptr<const Corpus> corpus) : corpus_(std::move(corpus)) {}

  SearchHits search(const BooleanQuery& query, std::size_t retmax) override;
  FetchResult fetch(const std::vector<std::string>& ids) override;
  std::string name() const override { return "local"; }

 private:
  std::shared_ptr<const Corpus> corpus_;
};

}  // namespace sysrev
