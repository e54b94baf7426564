#include "sysrev/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "sysrev/error.hpp"
#include "sysrev/text.hpp"

namespace sysrev {
namespace {

using nlohmann::json;

bool token_matches(const std::string& token, const std::string& pattern, bool prefix) {
  return prefix ? std::string_view(token).starts_with(pattern) : token == pattern;
}

bool sequence_in(const std::vector<std::string>& haystack, const std::vector<std::string>& needle, bool prefix_last) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < needle.size() && ok; ++k)
      ok = token_matches(haystack[i + k], needle[k], prefix_last && k + 1 == needle.size());
    if (ok) return true;
  }
  return false;
}

std::vector<std::size_t> set_union(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::size_t> set_intersection(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::string> string_array(const json& obj, const char* key, std::size_t line_no) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw MalformedLine(line_no, std::string("'") + key + "' must be an array");
  for (const auto& v : *it) {
    if (!v.is_string()) throw MalformedLine(line_no, std::string("'") + key + "' entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

bool evaluate(const TaggedTerm& term, const Article& article) {
  if (term.tag == FieldTag::Mesh) {
    auto key = normalize_label(term.text);
    if (key.empty()) return false;
    return std::any_of(article.mesh_terms.begin(), article.mesh_terms.end(), [&](const std::string& m) {
      auto entry = normalize_label(m);
      return term.wildcard ? std::string_view(entry).starts_with(key) : entry == key;
    });
  }
  auto needle = token_texts(term.text);
  return sequence_in(token_texts(article.title), needle, term.wildcard) ||
         sequence_in(token_texts(article.abstract), needle, term.wildcard);
}

bool evaluate(const BooleanQuery& query, const Article& article) {
  if (query.groups.empty()) return false;
  return std::all_of(query.groups.begin(), query.groups.end(), [&](const OrGroup& g) {
    return std::any_of(g.begin(), g.end(), [&](const TaggedTerm& t) { return evaluate(t, article); });
  });
}

Corpus::Corpus(std::vector<Article> articles) : articles_(std::move(articles)) {
  for (std::size_t doc = 0; doc < articles_.size(); ++doc) {
    const auto& a = articles_[doc];
    if (a.external_id.empty()) throw ValidationError("pmid", "article id must be non-empty");
    if (normalize_label(a.title).empty()) throw ValidationError("title", "article " + a.external_id + " has no title");
    if (!by_id_.emplace(a.external_id, doc).second)
      throw ValidationError("pmid", "duplicate article id " + a.external_id);

    const std::string* fields[] = {&a.title, &a.abstract};
    for (int f = 0; f < 2; ++f) {
      auto tokens = token_texts(*fields[f]);
      for (std::size_t pos = 0; pos < tokens.size(); ++pos) tiab_index_[tokens[pos]].push_back(Posting{doc, f, pos});
    }
    for (const auto& m : a.mesh_terms) {
      auto& docs = mesh_index_[normalize_label(m)];
      if (docs.empty() || docs.back() != doc) docs.push_back(doc);
    }
  }
}

Corpus Corpus::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open corpus file " + path.string());
  return parse(in);
}

Corpus Corpus::parse(std::istream& in) {
  std::vector<Article> articles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_label(line).empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw MalformedLine(line_no, "not a JSON object");
    Article a;
    if (!obj.contains("pmid") || !(obj["pmid"].is_string() || obj["pmid"].is_number_integer()))
      throw MalformedLine(line_no, "missing 'pmid'");
    a.external_id = obj["pmid"].is_string() ? obj["pmid"].get<std::string>() : std::to_string(obj["pmid"].get<long long>());
    if (!obj.contains("title") || !obj["title"].is_string()) throw MalformedLine(line_no, "missing 'title'");
    a.title = obj["title"].get<std::string>();
    if (obj.contains("abstract") && obj["abstract"].is_string()) a.abstract = obj["abstract"].get<std::string>();
    a.mesh_terms = string_array(obj, "mesh", line_no);
    if (obj.contains("journal") && obj["journal"].is_string()) a.journal = obj["journal"].get<std::string>();
    articles.push_back(std::move(a));
  }
  return Corpus(std::move(articles));
}

const Article* Corpus::find(const std::string& external_id) const {
  auto it = by_id_.find(external_id);
  return it == by_id_.end() ? nullptr : &articles_[it->second];
}

std::vector<Corpus::Posting> Corpus::postings_for(const std::string& token, bool prefix) const {
  if (!prefix) {
    auto it = tiab_index_.find(token);
    return it == tiab_index_.end() ? std::vector<Posting>{} : it->second;
  }
  std::vector<Posting> out;
  for (auto it = tiab_index_.lower_bound(token); it != tiab_index_.end() && it->first.starts_with(token); ++it)
    out.insert(out.end(), it->second.begin(), it->second.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> Corpus::match_term(const TaggedTerm& term) const {
  std::vector<std::size_t> docs;
  if (term.tag == FieldTag::Mesh) {
    auto key = normalize_label(term.text);
    if (key.empty()) return docs;
    if (!term.wildcard) {
      auto it = mesh_index_.find(key);
      return it == mesh_index_.end() ? docs : it->second;
    }
    for (auto it = mesh_index_.lower_bound(key); it != mesh_index_.end() && it->first.starts_with(key); ++it)
      docs = set_union(docs, it->second);
    return docs;
  }

  auto tokens = token_texts(term.text);
  if (tokens.empty()) return docs;
  // Phrase starts: postings of token k shifted back by k, intersected.
  std::vector<Posting> starts;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    auto postings = postings_for(tokens[k], term.wildcard && k + 1 == tokens.size());
    std::vector<Posting> shifted;
    for (const auto& p : postings)
      if (p.pos >= k) shifted.push_back(Posting{p.doc, p.field, p.pos - k});
    if (k == 0) {
      starts = std::move(shifted);
    } else {
      std::vector<Posting> kept;
      std::set_intersection(starts.begin(), starts.end(), shifted.begin(), shifted.end(), std::back_inserter(kept));
      starts = std::move(kept);
    }
    if (starts.empty()) return docs;
  }
  for (const auto& p : starts)
    if (docs.empty() || docs.back() != p.doc) docs.push_back(p.doc);
  return docs;
}

std::vector<std::size_t> Corpus::search(const BooleanQuery& query) const {
  if (query.groups.empty()) return {};
  std::vector<std::size_t> result;
  for (std::size_t g = 0; g < query.groups.size(); ++g) {
    std::vector<std::size_t> group_docs;
    for (const auto& t : query.groups[g]) group_docs = set_union(group_docs, match_term(t));
    result = g == 0 ? std::move(group_docs) : set_intersection(result, group_docs);
    if (result.empty()) break;
  }
  return result;
}

std::vector<Article> local_search(const Corpus& corpus, const BooleanQuery& query) {
  std::vector<Article> out;
  for (auto idx : corpus.search(query)) out.push_back(corpus.articles()[idx]);
  return out;
}

SearchHits LocalBackend::search(const BooleanQuery& query, std::size_t retmax) {
  auto docs = corpus_->search(query);
  SearchHits hits;
  hits.count = docs.size();
  for (std::size_t i = 0; i < docs.size() && i < retmax; ++i)
    hits.ids.push_back(corpus_->articles()[docs[i]].external_id);
  return hits;
}

FetchResult LocalBackend::fetch(const std::vector<std::string>& ids) {
  FetchResult out;
  for (const auto& id : ids) {
    if (const Article* a = corpus_->find(id)) {
      out.articles.push_back(*a);
    } else {
      out.missing.push_back(id);
    }
  }
  return out;
}

}  // namespace sysrev
