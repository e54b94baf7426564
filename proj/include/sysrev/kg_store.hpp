#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sysrev/field_tag.hpp"

namespace sysrev {

struct Concept {
  std::string id;
  std::string preferred_label;
  std::vector<std::string> synonyms;  // declared order, deduplicated
  FieldTag tag = FieldTag::Tiab;

  bool operator==(const Concept&) const = default;
};

/// Undirected edge, stored with source <= target so either spelling dedups.
struct Edge {
  std::string source;
  std::string target;
  std::string relation;

  auto operator<=>(const Edge&) const = default;
};

/// Immutable controlled-vocabulary graph. Every edge endpoint exists and the
/// label index covers every preferred label and synonym.
///
/// When two concepts share a normalized label, a preferred label beats a
/// synonym and the earlier-declared concept beats a later one.
class ConceptGraph {
 public:
  ConceptGraph() = default;

  /// Validates and indexes. Throws DuplicateId or DanglingEdge.
  ConceptGraph(std::vector<Concept> concepts, std::vector<Edge> edges);

  /// Reads the JSONL interchange format. Throws MalformedLine, DuplicateId,
  /// DanglingEdge, or StorageError if the file cannot be opened.
  static ConceptGraph load(const std::filesystem::path& path);
  static ConceptGraph parse(std::istream& in);

  const Concept* lookup(std::string_view label) const;
  const Concept* find(std::string_view id) const;

  /// Breadth-first closure within `max_hops`, excluding the start concept.
  /// Returned in discovery order. Throws UnknownConcept.
  std::vector<const Concept*> neighbors(std::string_view id, int max_hops) const;

  const std::vector<Concept>& concepts() const { return concepts_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::size_t size() const { return concepts_.size(); }

  /// Longest label or synonym, in tokens.
  std::size_t max_label_tokens() const { return max_label_tokens_; }

  /// Canonical JSONL serialization; `load` of this text reproduces the graph.
  std::string to_jsonl() const;

  /// Content hash of the canonical serialization.
  std::string version() const;

  bool operator==(const ConceptGraph& other) const;

 private:
  std::vector<Concept> concepts_;
  std::set<Edge> edges_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> label_index_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::size_t max_label_tokens_ = 0;
};

}  // namespace sysrev
