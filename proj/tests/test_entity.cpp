#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "sysrev/entity.hpp"
#include "sysrev/error.hpp"
#include "sysrev/kg_store.hpp"
#include "sysrev/text.hpp"

using namespace sysrev;

namespace {

const std::filesystem::path kFixtures = SYSREV_FIXTURES;

std::vector<std::string> surfaces(const std::vector<Entity>& es) {
  std::vector<std::string> out;
  for (const auto& e : es) out.push_back(e.surface);
  return out;
}

struct Span {
  std::size_t start, end;
};

// Token spans from a hand-rolled splitter, independent of tokenize().
std::vector<Span> word_spans(const std::string& s) {
  std::vector<Span> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !std::isalnum(static_cast<unsigned char>(s[i]))) ++i;
    if (i == s.size()) break;
    auto j = i;
    while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
    out.push_back({i, j});
    i = j;
  }
  return out;
}

std::string squash(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// Every token-aligned substring is checked against every label; the longest
// hit at the leftmost uncovered token is kept.
std::vector<std::string> substring_oracle(const std::string& text, const ConceptGraph& g) {
  std::set<std::string> labels;
  for (const auto& c : g.concepts()) {
    labels.insert(squash(c.preferred_label));
    for (const auto& s : c.synonyms) labels.insert(squash(s));
  }
  auto spans = word_spans(text);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < spans.size()) {
    std::size_t best = 0;
    for (std::size_t j = i; j < spans.size(); ++j) {
      auto sub = text.substr(spans[i].start, spans[j].end - spans[i].start);
      if (labels.contains(squash(sub))) best = j - i + 1;
    }
    if (best > 0) {
      out.push_back(text.substr(spans[i].start, spans[i + best - 1].end - spans[i].start));
      i += best;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<std::string> matched_only(const std::vector<Entity>& es) {
  std::vector<std::string> out;
  for (const auto& e : es)
    if (e.concept_id) out.push_back(e.surface);
  return out;
}

class FixedNer : public NerProvider {
 public:
  explicit FixedNer(std::vector<NerSpan> spans, bool fail = false) : spans_(std::move(spans)), fail_(fail) {}
  std::vector<NerSpan> find(std::string_view) override {
    if (fail_) throw ProviderUnavailable("down");
    return spans_;
  }
  std::string name() const override { return "fixed"; }

 private:
  std::vector<NerSpan> spans_;
  bool fail_;
};

}  // namespace

TEST_CASE("research question yields the four key terms") {
  auto g = ConceptGraph::load(kFixtures / "worked_example" / "graph.jsonl");
  auto es = extract_entities("Gender affirming surgeries for female-to-male transgender individuals", g, Origin::Query);
  CHECK(surfaces(es) == std::vector<std::string>{"Gender", "surgeries", "female-to-male transgender", "individuals"});
  CHECK(es[0].concept_id == "T01");
  CHECK(es[2].concept_id == "T02");
  CHECK_FALSE(es[1].concept_id);
  for (const auto& e : es) {
    CHECK(e.origin == Origin::Query);
    CHECK(e.relevance == 1.0);
  }
}

TEST_CASE("empty and stopword-only input") {
  auto g = ConceptGraph::load(kFixtures / "mesh-mini.jsonl");
  CHECK(extract_entities("", g, Origin::Query).empty());
  CHECK(extract_entities("of the and for", g, Origin::Query).empty());
}

TEST_CASE("catgut sutures splits unless the phrase is a label") {
  auto g = ConceptGraph::load(kFixtures / "mesh-mini.jsonl");
  CHECK(surfaces(extract_entities("catgut sutures", g, Origin::Query)) == std::vector<std::string>{"catgut", "sutures"});

  auto concepts = g.concepts();
  concepts.push_back(Concept{"X1", "Catgut Sutures", {}, FieldTag::Mesh});
  ConceptGraph with_phrase(concepts, {});
  auto es = extract_entities("catgut sutures", with_phrase, Origin::Query);
  CHECK(surfaces(es) == std::vector<std::string>{"catgut sutures"});
  CHECK(es[0].concept_id == "X1");
}

TEST_CASE("dictionary matches agree with an all-substrings oracle") {
  std::vector<Concept> concepts{
      {"c1", "wound infection", {"wound infections"}, FieldTag::Mesh},
      {"c2", "surgical wound infection", {}, FieldTag::Mesh},
      {"c3", "wound", {}, FieldTag::Tiab},
      {"c4", "catgut", {"catgut sutures"}, FieldTag::Mesh},
      {"c5", "sutures", {"suture material"}, FieldTag::Mesh},
      {"c6", "infection", {}, FieldTag::Tiab},
      {"c7", "antibiotic prophylaxis", {}, FieldTag::Mesh},
  };
  ConceptGraph g(concepts, {});
  const std::vector<std::string> vocab{"wound", "infection", "infections", "surgical", "catgut", "sutures",
                                       "suture", "material", "antibiotic", "prophylaxis", "after", "closure",
                                       "Wound", "SURGICAL", "rates"};
  std::mt19937 rng(77);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1), len(1, 12);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) text += (i ? (rng() % 5 == 0 ? "-" : " ") : "") + vocab[pick(rng)];
    auto got = match_dictionary(text, g, Origin::Query);
    auto expect = substring_oracle(text, g);
    // the matcher deduplicates; the oracle keeps repeats
    std::vector<std::string> dedup;
    std::set<std::string> seen;
    for (auto& s : expect)
      if (seen.insert(squash(s)).second) dedup.push_back(s);
    CHECK_MESSAGE(matched_only(got) == dedup, text);
    for (const auto& e : got)
      if (e.concept_id) CHECK(g.lookup(e.surface)->id == *e.concept_id);
  }
}

TEST_CASE("entity spans do not overlap and extraction is deterministic") {
  auto g = ConceptGraph::load(kFixtures / "mesh-mini.jsonl");
  std::string text = "Surgical equipment such as catgut and surgical sutures for wound closure";
  auto a = extract_entities(text, g, Origin::Sentinel);
  CHECK(a == extract_entities(text, g, Origin::Sentinel));
  std::size_t cursor = 0;
  for (const auto& e : a) {
    auto at = text.find(e.surface, cursor);
    REQUIRE(at != std::string::npos);
    cursor = at + e.surface.size();
  }
  CHECK(surfaces(a) == std::vector<std::string>{"Surgical equipment", "such", "catgut", "surgical sutures", "wound",
                                                "closure"});
}

TEST_CASE("merge keeps query entities first and drops duplicates") {
  std::vector<Entity> q{{"Gender", "T01", Origin::Query}};
  std::vector<Entity> s{{"gender", "T01", Origin::Sentinel}, {"chest reconstruction", std::nullopt, Origin::Sentinel}};
  auto m = merge_entities(q, s);
  REQUIRE(m.size() == 2);
  CHECK(m[0].surface == "Gender");
  CHECK(m[0].origin == Origin::Query);
  CHECK(m[1].surface == "chest reconstruction");
  CHECK(m[1].origin == Origin::Sentinel);
  CHECK(merge_entities({}, {}).empty());
}

TEST_CASE("merge of 20 entities with 5 planted duplicates") {
  std::mt19937 rng(5);
  std::vector<std::string> base;
  for (int i = 0; i < 15; ++i) base.push_back("term" + std::to_string(i));
  std::vector<Entity> q, s;
  for (int i = 0; i < 8; ++i) q.push_back({base[i], std::nullopt, Origin::Query});
  for (int i = 8; i < 15; ++i) s.push_back({base[i], std::nullopt, Origin::Sentinel});
  for (int i = 0; i < 5; ++i) {
    auto dup = base[rng() % 15];
    dup[0] = 'T';
    s.push_back({dup, std::nullopt, Origin::Sentinel});
  }
  std::shuffle(s.begin(), s.end(), rng);

  // set-union oracle over normalized surfaces, first occurrence wins
  std::vector<std::string> expect;
  std::set<std::string> seen;
  for (const auto* list : {&q, &s})
    for (const auto& e : *list)
      if (seen.insert(to_lower(e.surface)).second) expect.push_back(e.surface);

  auto m = merge_entities(q, s);
  CHECK(m.size() == 15);
  CHECK(surfaces(m) == expect);
  CHECK(merge_entities(q, s) == m);
}

TEST_CASE("external NER spans are used, and failures fall back") {
  auto g = ConceptGraph::load(kFixtures / "mesh-mini.jsonl");
  std::string text = "catgut sutures in surgery";
  FixedNer ner({{"catgut sutures", 0, 14}, {"surgery", 18, 25}, {"sutures", 7, 14}});
  auto es = extract_entities(text, g, Origin::Query, &ner);
  CHECK(surfaces(es) == std::vector<std::string>{"catgut sutures", "surgery"});
  CHECK_FALSE(es[0].concept_id);

  FixedNer down({}, true);
  CHECK(extract_entities(text, g, Origin::Query, &down) == match_dictionary(text, g, Origin::Query));
}

TEST_CASE("shipped stopword file matches the compiled list") {
  std::ifstream in(std::filesystem::path(SYSREV_DATA_DIR) / "stopwords.txt");
  REQUIRE(in);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') words.push_back(line);
  REQUIRE(words.size() == kStopwords.size());
  for (std::size_t i = 0; i < words.size(); ++i) CHECK(words[i] == kStopwords[i]);
}
