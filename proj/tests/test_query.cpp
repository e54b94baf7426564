#include <doctest.h>

#include <algorithm>
#include <random>

#include "sysrev/error.hpp"
#include "sysrev/query.hpp"
#include "golden.hpp"

using namespace sysrev;

namespace {

TaggedTerm q(std::string t) { return {std::move(t), FieldTag::Tiab, true, false}; }
TaggedTerm b(std::string t) { return {std::move(t), FieldTag::Tiab, false, false}; }
TaggedTerm w(std::string t) { return {std::move(t), FieldTag::Tiab, false, true}; }

ExpansionSet worked_example_expansion() {
  ExpansionSet exp;
  exp.entries.push_back({Entity{"Gender", "T01", Origin::Query}, {}, {}});
  exp.entries.push_back({Entity{"surgeries", std::nullopt, Origin::Query}, {}, {}});
  exp.entries.push_back(
      {Entity{"female-to-male transgender", "T02", Origin::Query}, {}, {"female", "transgender", "Gender"}});
  exp.entries.push_back({Entity{"individuals", std::nullopt, Origin::Query}, {}, {}});
  return exp;
}

}  // namespace

TEST_CASE("term variants") {
  CHECK(term_variants("Gender") == std::vector<TaggedTerm>{q("Gender"), b("Gender"), w("gender")});
  CHECK(term_variants("surgeries") == std::vector<TaggedTerm>{q("surgeries"), b("surgeries"), w("surgeri")});
  CHECK(term_variants("cat") == std::vector<TaggedTerm>{q("cat"), b("cat")});
  CHECK(term_variants("female-to-male transgender") == std::vector<TaggedTerm>{q("female-to-male transgender")});
}

TEST_CASE("stem table") {
  CHECK(wildcard_stem("female") == "femal");
  CHECK(wildcard_stem("transgender") == "transgend");
  CHECK(wildcard_stem("individuals") == "individu");
  CHECK(wildcard_stem("surgeries") == "surgeri");
  CHECK(wildcard_stem("Gender") == "gender");
  CHECK(wildcard_stem("therapies") == "therapi");
  CHECK(wildcard_stem("hospitals") == "hospit");
  CHECK(wildcard_stem("outcomes") == "outcom");
  CHECK(wildcard_stem("surgeon") == std::nullopt);
  CHECK(wildcard_stem("uses") == std::nullopt);
  CHECK(wildcard_stem("covid19") == std::nullopt);
}

TEST_CASE("expansion variants") {
  CHECK(expansion_variants("wound infections", FieldTag::Mesh) ==
        std::vector<TaggedTerm>{{"wound infections", FieldTag::Mesh, true, false}});
  CHECK(expansion_variants("Catgut", FieldTag::Mesh) == std::vector<TaggedTerm>{{"Catgut", FieldTag::Mesh, false, false}});
  CHECK(expansion_variants("female", FieldTag::Tiab) == std::vector<TaggedTerm>{b("female"), w("femal")});
}

TEST_CASE("worked example renders to the printed key") {
  auto query = build_specific_query(worked_example_expansion());
  CHECK(render(query) == kGoldenKey);
  CHECK(render(query).starts_with(R"(("Gender"[tiab] OR Gender[tiab] OR gender*[tiab]) AND)"));
}

TEST_CASE("single entity and minimal forms") {
  ExpansionSet exp;
  exp.entries.push_back({Entity{"sutures", std::nullopt, Origin::Query}, {}, {}});
  auto query = build_specific_query(exp);
  CHECK(query.groups.size() == 1);
  CHECK(render(query) == R"(("sutures"[tiab] OR sutures[tiab] OR sutur*[tiab]))");
  CHECK(render(BooleanQuery{{{q("wound infections")}}}) == R"(("wound infections"[tiab]))");
  CHECK_THROWS_AS(build_specific_query(ExpansionSet{}), EmptyExpansion);
}

TEST_CASE("group order follows entity order") {
  std::mt19937 rng(8);
  std::vector<std::string> words{"catgut", "sutures", "wound", "closure", "silk", "bandages", "infection"};
  for (int t = 0; t < 20; ++t) {
    std::shuffle(words.begin(), words.end(), rng);
    ExpansionSet exp;
    for (int i = 0; i < 3; ++i) exp.entries.push_back({Entity{words[i], std::nullopt, Origin::Query}, {}, {}});
    auto query = build_specific_query(exp);
    REQUIRE(query.groups.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(query.groups[i].front().text == words[i]);
  }
}

TEST_CASE("kg and mask terms join their group without duplicates") {
  ExpansionSet exp;
  exp.entries.push_back({Entity{"Sutures", "D1", Origin::Query},
                         {{"Catgut", FieldTag::Mesh, 0.4}, {"Surgical Equipment", FieldTag::Mesh, 0.3}},
                         {"Sutures", "stitches"}});
  CHECK(render(build_specific_query(exp)) ==
        R"(("Sutures"[tiab] OR Sutures[tiab] OR sutur*[tiab] OR Catgut[Mesh] OR "Surgical Equipment"[Mesh] OR stitches[tiab] OR stitch*[tiab]))");
}

TEST_CASE("the printed key parses into 3/3/7/3 groups") {
  auto query = parse_query(kGoldenKeyAsPrinted);
  REQUIRE(query.groups.size() == 4);
  CHECK(query.groups[0].size() == 3);
  CHECK(query.groups[1].size() == 3);
  CHECK(query.groups[2].size() == 7);
  CHECK(query.groups[3].size() == 3);
  CHECK(render(query) == kGoldenKey);
  CHECK(query == build_specific_query(worked_example_expansion()));
}

TEST_CASE("parse errors carry a position") {
  try {
    parse_query("(foo[tiab] AND");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 14);
  }
  CHECK_THROWS_AS(parse_query(""), ParseError);
  CHECK_THROWS_AS(parse_query("(foo[tiab]"), ParseError);
  CHECK_THROWS_AS(parse_query("(foo[title])"), ParseError);
  CHECK_THROWS_AS(parse_query("(foo[tiab]) OR (bar[tiab])"), ParseError);
  CHECK_THROWS_AS(parse_query("(\"foo\"*[tiab])"), ParseError);
  CHECK_THROWS_AS(parse_query("(foo[tiab] bar[tiab])"), ParseError);
  try {
    parse_query("(foo[tiab]))");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 11);
  }
}

TEST_CASE("tags are case-insensitive on input") {
  auto query = parse_query("(Catgut[MESH] OR catgut[TIAB])");
  CHECK(query.groups[0][0].tag == FieldTag::Mesh);
  CHECK(render(query) == "(Catgut[Mesh] OR catgut[tiab])");
}

TEST_CASE("invalid ASTs are rejected by render") {
  CHECK_THROWS_AS(render(BooleanQuery{}), InvalidQuery);
  CHECK_THROWS_AS(render(BooleanQuery{{{}}}), InvalidQuery);
  CHECK_THROWS_AS(render(BooleanQuery{{{b("two words")}}}), InvalidQuery);
  CHECK_THROWS_AS(render(BooleanQuery{{{TaggedTerm{"x", FieldTag::Tiab, true, true}}}}), InvalidQuery);
}

TEST_CASE("render then parse is a fixed point") {
  std::mt19937 rng(123);
  for (int i = 0; i < 100; ++i) {
    auto query = random_query(rng);
    auto text = render(query);
    CHECK(render(parse_query(text)) == text);
  }
}
