#include "sysrev/json_io.hpp"

#include "sysrev/error.hpp"
#include "sysrev/text.hpp"

namespace sysrev {

using nlohmann::json;

json to_json(const SentinelArticle& a) {
  json j{{"title", a.title}, {"abstract", a.abstract}};
  if (a.source_id) j["source_id"] = *a.source_id;
  return j;
}

SentinelArticle sentinel_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("sentinels", "each sentinel must be an object");
  SentinelArticle a;
  if (!j.contains("title") || !j["title"].is_string() || normalize_label(j["title"].get<std::string>()).empty())
    throw ValidationError("sentinels.title", "must be a non-empty string");
  a.title = j["title"].get<std::string>();
  if (j.contains("abstract")) {
    if (!j["abstract"].is_string()) throw ValidationError("sentinels.abstract", "must be a string");
    a.abstract = j["abstract"].get<std::string>();
  }
  if (j.contains("source_id") && !j["source_id"].is_null()) {
    if (!j["source_id"].is_string()) throw ValidationError("sentinels.source_id", "must be a string");
    a.source_id = j["source_id"].get<std::string>();
  }
  return a;
}

json to_json(const Article& a) {
  json j{{"external_id", a.external_id}, {"title", a.title}, {"abstract", a.abstract}, {"mesh_terms", a.mesh_terms}};
  j["journal"] = a.journal ? json(*a.journal) : json(nullptr);
  return j;
}

json to_json(const Entity& e) {
  return json{{"surface", e.surface},
              {"concept_id", e.concept_id ? json(*e.concept_id) : json(nullptr)},
              {"origin", e.origin == Origin::Query ? "QUERY" : "SENTINEL"},
              {"relevance", e.relevance}};
}

json to_json(const TaggedTerm& t) {
  return json{{"text", t.text}, {"tag", tag_name(t.tag)}, {"quoted", t.quoted}, {"wildcard", t.wildcard}};
}

json to_json(const RefinementTrace& t) {
  json iterations = json::array();
  for (const auto& step : t.iterations) {
    iterations.push_back({{"rendered", step.rendered},
                          {"groups", step.query.groups.size()},
                          {"hit_count", step.hit_count},
                          {"removed_entity", step.removed_entity ? to_json(*step.removed_entity) : json(nullptr)}});
  }
  return json{{"iterations", iterations}};
}

json to_json(const RankedArticle& r) {
  json spans = json::array();
  for (const auto& s : r.highlights) spans.push_back({s.start, s.end});
  json j = to_json(r.article);
  j["score_percent"] = r.score_percent;
  j["highlights"] = spans;
  return j;
}

json to_json(const ExpansionSet& exp) {
  json entries = json::array();
  for (const auto& e : exp.entries) {
    json kg = json::array();
    for (const auto& t : e.kg_terms) kg.push_back({{"label", t.label}, {"tag", tag_name(t.tag)}, {"similarity", t.similarity}});
    entries.push_back({{"entity", to_json(e.entity)}, {"kg_terms", kg}, {"mask_terms", e.mask_terms}});
  }
  return json{{"entries", entries}};
}

}  // namespace sysrev
