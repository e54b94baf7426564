#include <doctest.h>

#include <random>

#include "sysrev/embedding.hpp"
#include "sysrev/error.hpp"
#include "sysrev/refinement.hpp"

using namespace sysrev;

namespace {

ExpansionEntry entry(std::string surface, double relevance) {
  return ExpansionEntry{Entity{std::move(surface), std::nullopt, Origin::Query, relevance}, {}, {}};
}

class CountingBackend : public SearchBackend {
 public:
  explicit CountingBackend(std::shared_ptr<const Corpus> c) : inner_(std::move(c)) {}
  SearchHits search(const BooleanQuery& q, std::size_t retmax) override {
    ++searches;
    if (fail_on && searches == *fail_on) throw BackendError(503, "unavailable");
    return inner_.search(q, retmax);
  }
  FetchResult fetch(const std::vector<std::string>& ids) override {
    ++fetches;
    return inner_.fetch(ids);
  }
  std::string name() const override { return "counting"; }
  int searches = 0;
  int fetches = 0;
  std::optional<int> fail_on;

 private:
  LocalBackend inner_;
};

std::shared_ptr<const Corpus> engineered_corpus() {
  std::vector<Article> docs;
  for (int i = 0; i < 10; ++i) docs.push_back({"ab" + std::to_string(i), "alpha bravo study", "nothing else", {}, {}});
  for (int i = 0; i < 2; ++i)
    docs.push_back({"abcd" + std::to_string(i), "alpha bravo charlie", "and delta too", {}, {}});
  docs.push_back({"c0", "charlie only", "", {}, {}});
  return std::make_shared<const Corpus>(std::move(docs));
}

}  // namespace

TEST_CASE("relevance of the worked-example entities against the query alone") {
  HashedBagEmbedder emb;
  ExpansionSet exp;
  for (auto s : {"Gender", "surgeries", "female-to-male transgender", "individuals"}) exp.entries.push_back(entry(s, 1.0));
  exp.context_embedding = emb.embed("Gender affirming surgeries for female-to-male transgender individuals");
  entity_relevance(exp, emb);
  // nine distinct tokens in nine distinct buckets: each query token weighs 1/3
  CHECK(exp.entries[0].entity.relevance == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(exp.entries[1].entity.relevance == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(exp.entries[2].entity.relevance == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(exp.entries[3].entity.relevance == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("relevance endpoints") {
  HashedBagEmbedder emb;
  ExpansionSet exp;
  exp.entries = {entry("catgut sutures", 1.0), entry("bandages", 1.0)};
  exp.context_embedding = emb.embed("catgut sutures");
  entity_relevance(exp, emb);
  CHECK(exp.entries[0].entity.relevance == doctest::Approx(1.0));
  CHECK(exp.entries[1].entity.relevance == doctest::Approx(0.5));
}

TEST_CASE("no widening when the specific query is already enough") {
  CountingBackend backend(engineered_corpus());
  ExpansionSet exp;
  exp.entries = {entry("alpha", 0.9), entry("bravo", 0.8)};
  auto r = refine_until(exp, backend, 10);
  CHECK(r.trace.iterations.size() == 1);
  CHECK_FALSE(r.trace.iterations[0].removed_entity);
  CHECK(r.trace.iterations[0].hit_count == 12);
  CHECK(r.articles.size() == 12);
  CHECK(backend.searches == 1);
  CHECK(backend.fetches == 1);
}

TEST_CASE("least relevant entities are dropped until n_min is reached") {
  CountingBackend backend(engineered_corpus());
  ExpansionSet exp;
  exp.entries = {entry("alpha", 0.9), entry("delta", 0.2), entry("bravo", 0.8), entry("charlie", 0.3)};
  auto r = refine_until(exp, backend, 10);
  REQUIRE(r.trace.iterations.size() == 3);
  CHECK(r.trace.iterations[0].hit_count == 2);
  CHECK(r.trace.iterations[0].removed_entity->surface == "delta");
  CHECK(r.trace.iterations[1].hit_count == 2);
  CHECK(r.trace.iterations[1].removed_entity->surface == "charlie");
  CHECK(r.trace.iterations[2].hit_count == 12);
  CHECK_FALSE(r.trace.iterations[2].removed_entity);
  CHECK(r.rendered == R"(("alpha"[tiab] OR alpha[tiab]) AND ("bravo"[tiab] OR bravo[tiab]))");
  CHECK(r.surviving_entities.size() == 2);
  CHECK(r.articles.size() == 12);
}

TEST_CASE("ties remove the later entity") {
  CountingBackend backend(engineered_corpus());
  ExpansionSet exp;
  exp.entries = {entry("charlie", 0.5), entry("delta", 0.5), entry("alpha", 0.5)};
  auto r = refine_until(exp, backend, 100);
  REQUIRE(r.trace.iterations.size() == 3);
  CHECK(r.trace.iterations[0].removed_entity->surface == "alpha");
  CHECK(r.trace.iterations[1].removed_entity->surface == "delta");
}

TEST_CASE("exhaustion keeps the last single-entity query") {
  CountingBackend backend(engineered_corpus());
  ExpansionSet exp;
  exp.entries = {entry("alpha", 0.9), entry("delta", 0.2), entry("charlie", 0.4)};
  auto r = refine_until(exp, backend, 1000);
  CHECK(r.trace.iterations.size() == 3);
  CHECK(backend.searches == 3);
  CHECK(r.surviving_entities.size() == 1);
  CHECK(r.surviving_entities[0].surface == "alpha");
  CHECK(r.trace.iterations.back().hit_count == 12);
  CHECK(r.articles.size() == 12);
}

TEST_CASE("backend failures carry the trace so far") {
  CountingBackend backend(engineered_corpus());
  backend.fail_on = 2;
  ExpansionSet exp;
  exp.entries = {entry("alpha", 0.9), entry("delta", 0.2), entry("bravo", 0.8)};
  try {
    refine_until(exp, backend, 10);
    FAIL("expected RefinementError");
  } catch (const RefinementError& e) {
    CHECK(e.status() == 503);
    REQUIRE(e.trace().iterations.size() == 1);
    CHECK(e.trace().iterations[0].removed_entity->surface == "delta");
  }
  CHECK_THROWS_AS(refine_until(exp, backend, 0), ValidationError);
}

TEST_CASE("retmax caps the fetched articles") {
  CountingBackend backend(engineered_corpus());
  ExpansionSet exp;
  exp.entries = {entry("alpha", 0.9)};
  auto r = refine_until(exp, backend, 1, 5);
  CHECK(r.trace.iterations[0].hit_count == 12);
  CHECK(r.articles.size() == 5);
}
