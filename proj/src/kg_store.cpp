#include "sysrev/kg_store.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sysrev/error.hpp"
#include "sysrev/text.hpp"

namespace sysrev {
namespace {

using nlohmann::json;

std::vector<std::string> clean_synonyms(const std::string& label, const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  std::vector<std::string> seen{normalize_label(label)};
  for (const auto& s : raw) {
    auto key = normalize_label(s);
    if (key.empty() || std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    out.push_back(s);
  }
  return out;
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) throw MalformedLine(line_no, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

}  // namespace

ConceptGraph::ConceptGraph(std::vector<Concept> concepts, std::vector<Edge> edges) : concepts_(std::move(concepts)) {
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    auto& c = concepts_[i];
    if (c.id.empty()) throw ValidationError("id", "concept id must be non-empty");
    if (normalize_label(c.preferred_label).empty())
      throw ValidationError("label", "concept " + c.id + " has an empty preferred label");
    if (!by_id_.emplace(c.id, i).second) throw DuplicateId(c.id);
    c.synonyms = clean_synonyms(c.preferred_label, c.synonyms);
  }

  for (auto& e : edges) {
    if (!by_id_.contains(e.source)) throw DanglingEdge(e.target, e.source);
    if (!by_id_.contains(e.target)) throw DanglingEdge(e.source, e.target);
    if (e.target < e.source) std::swap(e.source, e.target);
    edges_.insert(std::move(e));
  }

  adjacency_.resize(concepts_.size());
  for (const auto& e : edges_) {
    auto a = by_id_.at(e.source);
    auto b = by_id_.at(e.target);
    if (a == b) continue;
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }

  auto note_tokens = [this](const std::string& label) {
    max_label_tokens_ = std::max(max_label_tokens_, tokenize(label).size());
  };
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    label_index_.emplace(normalize_label(concepts_[i].preferred_label), i);
    note_tokens(concepts_[i].preferred_label);
  }
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    for (const auto& s : concepts_[i].synonyms) {
      label_index_.emplace(normalize_label(s), i);
      note_tokens(s);
    }
  }
}

ConceptGraph ConceptGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open graph file " + path.string());
  return parse(in);
}

ConceptGraph ConceptGraph::parse(std::istream& in) {
  std::vector<Concept> concepts;
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_label(line).empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw MalformedLine(line_no, "not a JSON object");

    Concept c;
    c.id = require_string(obj, "id", line_no);
    c.preferred_label = require_string(obj, "label", line_no);
    if (c.id.empty()) throw MalformedLine(line_no, "empty id");
    if (normalize_label(c.preferred_label).empty()) throw MalformedLine(line_no, "empty label");

    if (auto it = obj.find("synonyms"); it != obj.end()) {
      if (!it->is_array()) throw MalformedLine(line_no, "'synonyms' must be an array");
      for (const auto& s : *it) {
        if (!s.is_string()) throw MalformedLine(line_no, "synonym must be a string");
        c.synonyms.push_back(s.get<std::string>());
      }
    }
    if (auto it = obj.find("tag"); it != obj.end()) {
      auto tag = it->is_string() ? parse_tag_name(it->get<std::string>()) : std::nullopt;
      if (!tag) throw MalformedLine(line_no, "'tag' must be \"MESH\" or \"TIAB\"");
      c.tag = *tag;
    }
    if (auto it = obj.find("edges"); it != obj.end()) {
      if (!it->is_array()) throw MalformedLine(line_no, "'edges' must be an array");
      for (const auto& e : *it) {
        if (!e.is_object()) throw MalformedLine(line_no, "edge must be an object");
        auto to = require_string(e, "to", line_no);
        std::string rel = e.contains("rel") && e["rel"].is_string() ? e["rel"].get<std::string>() : "";
        edges.push_back(Edge{c.id, std::move(to), std::move(rel)});
      }
    }
    concepts.push_back(std::move(c));
  }
  return ConceptGraph(std::move(concepts), std::move(edges));
}

const Concept* ConceptGraph::lookup(std::string_view label) const {
  auto it = label_index_.find(normalize_label(label));
  return it == label_index_.end() ? nullptr : &concepts_[it->second];
}

const Concept* ConceptGraph::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &concepts_[it->second];
}

std::vector<const Concept*> ConceptGraph::neighbors(std::string_view id, int max_hops) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) throw UnknownConcept(std::string(id));

  std::vector<int> depth(concepts_.size(), -1);
  std::deque<std::size_t> frontier{it->second};
  depth[it->second] = 0;
  std::vector<const Concept*> out;
  while (!frontier.empty()) {
    auto cur = frontier.front();
    frontier.pop_front();
    if (depth[cur] >= max_hops) continue;
    for (auto next : adjacency_[cur]) {
      if (depth[next] >= 0) continue;
      depth[next] = depth[cur] + 1;
      out.push_back(&concepts_[next]);
      frontier.push_back(next);
    }
  }
  return out;
}

std::string ConceptGraph::to_jsonl() const {
  std::ostringstream out;
  for (const auto& c : concepts_) {
    json obj = {{"id", c.id}, {"label", c.preferred_label}, {"synonyms", c.synonyms}, {"tag", tag_name(c.tag)}};
    json edges = json::array();
    for (auto it = edges_.lower_bound(Edge{c.id, "", ""}); it != edges_.end() && it->source == c.id; ++it)
      edges.push_back({{"to", it->target}, {"rel", it->relation}});
    obj["edges"] = std::move(edges);
    out << obj.dump() << '\n';
  }
  return out.str();
}

std::string ConceptGraph::version() const { return hex64(fnv1a64(to_jsonl())); }

bool ConceptGraph::operator==(const ConceptGraph& other) const {
  return concepts_ == other.concepts_ && edges_ == other.edges_;
}

}  // namespace sysrev
