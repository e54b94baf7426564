#include "sysrev/query.hpp"

#include <algorithm>
#include <cctype>

#include "sysrev/error.hpp"
#include "sysrev/text.hpp"

namespace sysrev {
namespace {

bool is_alpha_word(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c) != 0; });
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_bare_char(char c) {
  return !is_space(c) && c != '(' && c != ')' && c != '[' && c != ']' && c != '"' && c != '*';
}

bool is_bare_renderable(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_bare_char);
}

std::string strip_quotes(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != '"') out.push_back(c);
  return out;
}

void append_unique(OrGroup& group, const std::vector<TaggedTerm>& terms) {
  for (const auto& t : terms)
    if (std::find(group.begin(), group.end(), t) == group.end()) group.push_back(t);
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  BooleanQuery parse() {
    check_balance();
    BooleanQuery q;
    skip_ws();
    q.groups.push_back(group());
    for (;;) {
      skip_ws();
      if (eof()) break;
      keyword("AND", "'AND' or end of input");
      skip_ws();
      q.groups.push_back(group());
    }
    return q;
  }

 private:
  // Unbalanced parentheses are reported where the missing ')' is expected.
  void check_balance() const {
    int depth = 0;
    bool in_quote = false;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      char c = s_[i];
      if (c == '"') in_quote = !in_quote;
      if (in_quote) continue;
      if (c == '(') ++depth;
      if (c == ')' && --depth < 0) throw ParseError(i, "'(' before ')'");
    }
    if (in_quote) throw ParseError(s_.size(), "closing '\"'");
    if (depth > 0) throw ParseError(s_.size(), "')'");
  }

  OrGroup group() {
    expect('(', "'('");
    OrGroup g;
    skip_ws();
    g.push_back(term());
    for (;;) {
      skip_ws();
      if (peek(')')) {
        ++pos_;
        return g;
      }
      keyword("OR", "')' or 'OR'");
      skip_ws();
      g.push_back(term());
    }
  }

  TaggedTerm term() {
    TaggedTerm t;
    if (peek('"')) {
      ++pos_;
      auto start = pos_;
      while (!eof() && s_[pos_] != '"') ++pos_;
      if (eof()) throw ParseError(pos_, "closing '\"'");
      if (pos_ == start) throw ParseError(pos_, "quoted text");
      t.text = std::string(s_.substr(start, pos_ - start));
      t.quoted = true;
      ++pos_;
    } else {
      auto start = pos_;
      while (!eof() && is_bare_char(s_[pos_])) ++pos_;
      if (pos_ == start) throw ParseError(pos_, "term");
      t.text = std::string(s_.substr(start, pos_ - start));
    }
    if (peek('*')) {
      if (t.quoted) throw ParseError(pos_, "'[' (wildcards cannot follow a quoted phrase)");
      t.wildcard = true;
      ++pos_;
    }
    expect('[', "'['");
    auto start = pos_;
    while (!eof() && s_[pos_] != ']') ++pos_;
    if (eof()) throw ParseError(pos_, "']'");
    auto tag = to_lower(s_.substr(start, pos_ - start));
    if (tag == "tiab") {
      t.tag = FieldTag::Tiab;
    } else if (tag == "mesh") {
      t.tag = FieldTag::Mesh;
    } else {
      throw ParseError(start, "field tag 'tiab' or 'Mesh'");
    }
    ++pos_;
    return t;
  }

  void keyword(std::string_view kw, const char* expected) {
    if (s_.substr(pos_, kw.size()) != kw) throw ParseError(pos_, expected);
    pos_ += kw.size();
    if (eof() || !is_space(s_[pos_])) throw ParseError(pos_, "whitespace after '" + std::string(kw) + "'");
  }

  void expect(char c, const char* expected) {
    if (!peek(c)) throw ParseError(pos_, expected);
    ++pos_;
  }

  bool peek(char c) const { return !eof() && s_[pos_] == c; }
  bool eof() const { return pos_ >= s_.size(); }
  void skip_ws() {
    while (!eof() && is_space(s_[pos_])) ++pos_;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<std::string> wildcard_stem(std::string_view word) {
  if (!is_alpha_word(word)) return std::nullopt;
  auto lower = to_lower(word);
  for (const auto& ex : kStemExceptions)
    if (ex.word == lower) return std::string(ex.stem);

  const SuffixRule* best = nullptr;
  for (const auto& rule : kSuffixRules) {
    if (!std::string_view(lower).ends_with(rule.suffix)) continue;
    auto stem_len = lower.size() - rule.suffix.size() + rule.replacement.size();
    if (stem_len < kMinStemLength) continue;
    if (best == nullptr || rule.suffix.size() > best->suffix.size()) best = &rule;
  }
  if (best == nullptr) return std::nullopt;
  return lower.substr(0, lower.size() - best->suffix.size()) + std::string(best->replacement);
}

std::vector<TaggedTerm> term_variants(std::string_view surface) {
  std::vector<TaggedTerm> out;
  auto phrase = strip_quotes(surface);
  if (phrase.empty()) return out;
  out.push_back(TaggedTerm{phrase, FieldTag::Tiab, true, false});
  if (is_bare_renderable(surface)) out.push_back(TaggedTerm{std::string(surface), FieldTag::Tiab, false, false});
  if (auto stem = wildcard_stem(surface)) out.push_back(TaggedTerm{*stem, FieldTag::Tiab, false, true});
  return out;
}

std::vector<TaggedTerm> expansion_variants(std::string_view label, FieldTag tag) {
  std::vector<TaggedTerm> out;
  if (!is_bare_renderable(label)) {
    auto phrase = strip_quotes(label);
    if (!normalize_label(phrase).empty()) out.push_back(TaggedTerm{phrase, tag, true, false});
    return out;
  }
  out.push_back(TaggedTerm{std::string(label), tag, false, false});
  if (tag == FieldTag::Tiab)
    if (auto stem = wildcard_stem(label)) out.push_back(TaggedTerm{*stem, tag, false, true});
  return out;
}

BooleanQuery build_specific_query(const ExpansionSet& exp) {
  if (exp.entries.empty()) throw EmptyExpansion();
  BooleanQuery q;
  for (const auto& entry : exp.entries) {
    OrGroup group;
    append_unique(group, term_variants(entry.entity.surface));
    for (const auto& kg : entry.kg_terms) append_unique(group, expansion_variants(kg.label, kg.tag));
    for (const auto& m : entry.mask_terms) append_unique(group, expansion_variants(m, FieldTag::Tiab));
    if (group.empty()) throw EmptyExpansion("entity '" + entry.entity.surface + "' has no renderable terms");
    q.groups.push_back(std::move(group));
  }
  return q;
}

void validate(const BooleanQuery& query) {
  if (query.groups.empty()) throw InvalidQuery("query has no groups");
  for (const auto& g : query.groups) {
    if (g.empty()) throw InvalidQuery("empty OR group");
    for (const auto& t : g) {
      if (t.text.empty()) throw InvalidQuery("empty term text");
      if (t.wildcard && t.quoted) throw InvalidQuery("wildcard term '" + t.text + "' is quoted");
      if (t.quoted && t.text.find('"') != std::string::npos)
        throw InvalidQuery("quoted term contains '\"': " + t.text);
      if (!t.quoted && !is_bare_renderable(t.text)) throw InvalidQuery("term needs quoting: " + t.text);
    }
  }
}

std::string render(const TaggedTerm& term) {
  std::string out;
  if (term.quoted) {
    out += '"';
    out += term.text;
    out += '"';
  } else {
    out += term.text;
    if (term.wildcard) out += '*';
  }
  out += tag_suffix(term.tag);
  return out;
}

std::string render(const BooleanQuery& query) {
  validate(query);
  std::string out;
  for (std::size_t g = 0; g < query.groups.size(); ++g) {
    if (g > 0) out += " AND ";
    out += '(';
    for (std::size_t i = 0; i < query.groups[g].size(); ++i) {
      if (i > 0) out += " OR ";
      out += render(query.groups[g][i]);
    }
    out += ')';
  }
  return out;
}

BooleanQuery parse_query(std::string_view rendered) { return Parser(rendered).parse(); }

}  // namespace sysrev
