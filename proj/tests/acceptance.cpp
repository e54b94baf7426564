// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances and time budgets are fixed below.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include <httplib.h>

#include "sysrev/entity.hpp"
#include "sysrev/error.hpp"
#include "sysrev/expansion.hpp"
#include "sysrev/pipeline.hpp"
#include "sysrev/query.hpp"
#include "sysrev/refinement.hpp"
#include "sysrev/rerank.hpp"
#include "sysrev/retrieval.hpp"
#include "sysrev/service.hpp"
#include "worked_example.hpp"
#include "golden.hpp"
#include "synthetic.hpp"
#include "tempdir.hpp"

using namespace sysrev;
using nlohmann::json;

namespace {

constexpr double kGoldenBudgetSeconds = 1.0;
constexpr double kRefinementBudgetSeconds = 30.0;
constexpr double kOracleBudgetSeconds = 10.0;
constexpr std::size_t kCorpusSize = 1000;
constexpr int kEntitySets = 200;
constexpr int kOracleQueries = 100;
constexpr int kRoundTripQueries = 500;
constexpr int kShuffles = 50;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome golden_query() {
  Clock clock;
  auto graph = ConceptGraph::load(worked_example::kDir / "graph.jsonl");
  HashedBagEmbedder emb;
  auto sentinels = worked_example::sentinels();
  auto q = extract_entities(worked_example::kQuestion, graph, Origin::Query);
  std::vector<Entity> s;
  for (const auto& a : sentinels) {
    auto found = extract_entities(a.text(), graph, Origin::Sentinel);
    s.insert(s.end(), found.begin(), found.end());
  }
  auto entities = merge_entities(q, select_sentinel_entities(q, s));
  auto exp = build_expansion(entities, graph, emb, nullptr, worked_example::kQuestion, sentinels);
  auto rendered = render(build_specific_query(exp));

  TempDir dir;
  auto config = worked_example::config(dir.path());
  auto deps = make_dependencies(config, false);
  auto response = run_search(request_from_json(worked_example::request_json(), config), deps);
  double t = clock.seconds();
  bool exact = rendered == kGoldenKey && response.rendered_query == kGoldenKey;
  return {exact && t < kGoldenBudgetSeconds,
          fmt("%s, %.3f s (budget %.0f s)", exact ? "byte-identical" : ("got " + rendered).c_str(), t,
              kGoldenBudgetSeconds)};
}

std::string run_capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    status = -1;
    return out;
  }
  char buf[4096];
  while (auto n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int raw = pclose(p);
  status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

Outcome relevance_metric(const std::string& cli) {
  int status = 0;
  auto out = run_capture(cli + " eval --requests " + (worked_example::kDir / "requests.jsonl").string() + " --judgments " +
                             (worked_example::kDir / "judgments.jsonl").string(),
                         status);
  auto report = json::parse(out, nullptr, false);
  double via_eval = (!report.is_discarded() && report.contains("relevance_percentage"))
                        ? report["relevance_percentage"].get<double>()
                        : -1.0;

  TempDir dir;
  auto config = worked_example::config(dir.path());
  Service service(make_dependencies(config), config);
  HttpServer server(service);
  int port = server.bind("127.0.0.1", 0);
  server.start();
  httplib::Client http("127.0.0.1", port);
  double via_http = -1.0;
  auto search = http.Post("/api/search", worked_example::request_json().dump(), "application/json");
  if (search && search->status == 200) {
    auto body = json::parse(search->body);
    const auto& results = body["results"];
    bool posted = results.size() == 5;
    for (std::size_t i = 0; posted && i < results.size(); ++i) {
      json fb{{"query_id", body["query_id"]},
              {"article_id", results[i]["external_id"]},
              {"relevant", i != 2}};
      auto res = http.Post("/api/feedback", fb.dump(), "application/json");
      posted = res && res->status == 204;
    }
    auto metrics = posted ? http.Get("/api/metrics") : httplib::Result{};
    if (metrics && metrics->status == 200) via_http = json::parse(metrics->body)["relevance_percentage"].get<double>();
  }
  server.stop();
  return {status == 0 && via_eval == 80.0 && via_http == 80.0,
          fmt("eval %.1f, GET /api/metrics %.1f (exact 80.0)", via_eval, via_http)};
}

class CountingBackend : public SearchBackend {
 public:
  explicit CountingBackend(std::shared_ptr<const Corpus> c) : inner_(std::move(c)) {}
  SearchHits search(const BooleanQuery& q, std::size_t retmax) override {
    ++searches;
    return inner_.search(q, retmax);
  }
  FetchResult fetch(const std::vector<std::string>& ids) override { return inner_.fetch(ids); }
  std::string name() const override { return "counting"; }
  int searches = 0;

 private:
  LocalBackend inner_;
};

Outcome refinement_properties() {
  Clock clock;
  std::mt19937 rng(1001);
  auto docs = synthetic::corpus(rng, kCorpusSize);
  auto corpus = std::make_shared<const Corpus>(docs);
  HashedBagEmbedder emb;
  const auto& vocab = synthetic::words();
  int bound_violations = 0, inclusion_violations = 0, order_violations = 0, widened = 0;

  for (int set = 0; set < kEntitySets; ++set) {
    std::vector<std::string> pool = vocab;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t n = 2 + rng() % 5;
    std::vector<Entity> entities;
    for (std::size_t i = 0; i < n; ++i) entities.push_back(Entity{pool[i], std::nullopt, Origin::Query});
    auto context_text = synthetic::sentence(rng, 4, 12);
    auto exp = build_expansion(entities, ConceptGraph{}, emb, nullptr, context_text, {});
    entity_relevance(exp, emb);

    CountingBackend backend(corpus);
    auto result = refine_until(exp, backend, 1 + rng() % 150);
    if (backend.searches > static_cast<int>(n)) ++bound_violations;
    widened += result.trace.iterations.size() > 1;

    std::vector<std::size_t> previous;
    double last_removed = -1.0;
    for (std::size_t i = 0; i < result.trace.iterations.size(); ++i) {
      const auto& step = result.trace.iterations[i];
      std::vector<std::size_t> hits;
      for (std::size_t d = 0; d < docs.size(); ++d)
        if (evaluate(step.query, docs[d])) hits.push_back(d);
      if (hits.size() != step.hit_count) ++inclusion_violations;
      if (i > 0 && !std::includes(hits.begin(), hits.end(), previous.begin(), previous.end())) ++inclusion_violations;
      previous = std::move(hits);
      if (step.removed_entity) {
        if (step.removed_entity->relevance < last_removed) ++order_violations;
        last_removed = step.removed_entity->relevance;
      }
    }
  }
  double t = clock.seconds();
  bool ok = bound_violations == 0 && inclusion_violations == 0 && order_violations == 0 && widened > 0 &&
            t < kRefinementBudgetSeconds;
  return {ok, fmt("%d entity sets, %d widened; violations: bound %d, inclusion %d, order %d; %.2f s (budget %.0f s)",
                  kEntitySets, widened, bound_violations, inclusion_violations, order_violations, t,
                  kRefinementBudgetSeconds)};
}

Outcome oracle_equivalence() {
  std::mt19937 rng(4242);
  auto docs = synthetic::corpus(rng, kCorpusSize);
  Corpus corpus(docs);
  Clock clock;
  int mismatches = 0;
  std::size_t total_hits = 0;
  for (int i = 0; i < kOracleQueries; ++i) {
    auto q = synthetic::query(rng);
    auto fast = local_search(corpus, q);
    std::vector<Article> slow;
    for (const auto& d : docs)
      if (evaluate(q, d)) slow.push_back(d);
    mismatches += fast != slow;
    total_hits += fast.size();
  }
  double t = clock.seconds();
  return {mismatches == 0 && total_hits > 0 && t < kOracleBudgetSeconds,
          fmt("%d queries x %zu docs, %d mismatches, %zu hits, %.2f s (budget %.0f s)", kOracleQueries, kCorpusSize,
              mismatches, total_hits, t, kOracleBudgetSeconds)};
}

Outcome round_trip() {
  std::mt19937 rng(500);
  int failures = 0;
  for (int i = 0; i < kRoundTripQueries; ++i) {
    auto q = random_query(rng);
    try {
      failures += parse_query(render(q)) != q;
    } catch (const Error&) {
      ++failures;
    }
  }
  auto key = parse_query(kGoldenKeyAsPrinted);
  std::string shape;
  for (const auto& g : key.groups) shape += (shape.empty() ? "" : "/") + std::to_string(g.size());
  bool key_ok = shape == "3/3/7/3" && parse_query(render(key)) == key;
  return {failures == 0 && key_ok, fmt("%d/%d random ASTs, printed key parses as %s", kRoundTripQueries - failures,
                                       kRoundTripQueries, shape.c_str())};
}

Outcome determinism() {
  TempDir dir;
  auto config = worked_example::config(dir.path());
  auto request = request_from_json(worked_example::request_json(), config);
  auto ids = [](const SearchResponse& r) {
    std::vector<std::string> out;
    for (const auto& a : r.results) out.push_back(a.article.external_id + "@" + std::to_string(a.score_percent));
    return out;
  };
  auto deps_a = make_dependencies(config);
  auto deps_b = make_dependencies(config);
  auto a = run_search(request, deps_a);
  auto b = run_search(request, deps_b);

  auto wide = request;
  wide.query = "antibiotic prophylaxis and wound infection after breast surgery in transgender patients";
  wide.n_min = 30;
  auto c = run_search(wide, deps_a);
  auto d = run_search(wide, deps_b);
  bool same = a.rendered_query == b.rendered_query && ids(a) == ids(b) && c.rendered_query == d.rendered_query &&
              ids(c) == ids(d) && !a.results.empty() && !c.results.empty();
  bool fresh_ids = a.query_id != b.query_id;
  return {same && fresh_ids, fmt("2 requests x 2 runs: rendered and ordering %s, query ids %s",
                                 same ? "identical" : "DIFFER", fresh_ids ? "distinct" : "repeated")};
}

Outcome rerank_contract() {
  std::mt19937 rng(50);
  HashedBagEmbedder emb;
  auto docs = synthetic::corpus(rng, 200);
  const auto& target = docs[137];
  std::string query = target.abstract.empty() ? target.title : target.title + " " + target.abstract;
  auto base = rerank(docs, query, {}, docs.size(), emb);
  bool self_first = !base.empty() && base[0].article.external_id == target.external_id && base[0].score_percent == 100.0;
  bool bounded = std::all_of(base.begin(), base.end(),
                             [](const RankedArticle& r) { return r.score_percent >= 0.0 && r.score_percent <= 100.0; });
  auto order = [](const std::vector<RankedArticle>& r) {
    std::vector<std::string> out;
    for (const auto& a : r) out.push_back(a.article.external_id);
    return out;
  };
  auto top = order(base);
  top.resize(std::min<std::size_t>(top.size(), 5));
  int changed = 0;
  for (int i = 0; i < kShuffles; ++i) {
    std::shuffle(docs.begin(), docs.end(), rng);
    changed += order(rerank(docs, query, {}, 5, emb)) != top;
  }
  return {self_first && bounded && changed == 0,
          fmt("self score %.2f at rank %s, scores in [0,100]: %s, %d/%d shuffles changed the top 5",
              base.empty() ? -1.0 : base[0].score_percent, self_first ? "1" : "!=1", bounded ? "yes" : "no", changed,
              kShuffles)};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = argc > 1 ? argv[1] : SYSREV_CLI;
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"golden-query-reproduction", golden_query},
      {"relevance-percentage", [&] { return relevance_metric(cli); }},
      {"refinement-properties", refinement_properties},
      {"boolean-oracle-equivalence", oracle_equivalence},
      {"render-parse-round-trip", round_trip},
      {"search-determinism", determinism},
      {"rerank-contract", rerank_contract},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
