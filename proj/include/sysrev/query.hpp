#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sysrev/expansion.hpp"
#include "sysrev/field_tag.hpp"

namespace sysrev {

/// One searchable term. A wildcard term holds its stem and renders as
/// `stem*`; wildcard terms are never quoted.
struct TaggedTerm {
  std::string text;
  FieldTag tag = FieldTag::Tiab;
  bool quoted = false;
  bool wildcard = false;

  bool operator==(const TaggedTerm&) const = default;
};

using OrGroup = std::vector<TaggedTerm>;

/// Conjunction of disjunctive groups, one group per surviving entity.
struct BooleanQuery {
  std::vector<OrGroup> groups;

  bool operator==(const BooleanQuery&) const = default;
};

// -- stemming ---------------------------------------------------------------

struct SuffixRule {
  std::string_view suffix;
  std::string_view replacement;
};

struct StemException {
  std::string_view word;
  std::string_view stem;
};

inline constexpr std::string_view kStemTableVersion = "v1";
inline constexpr std::size_t kMinStemLength = 4;

inline constexpr std::array<SuffixRule, 6> kSuffixRules{{
    {"ies", "i"},
    {"als", ""},
    {"es", ""},
    {"er", ""},
    {"s", ""},
    {"e", ""},
}};

// Pinned stems that take precedence over the suffix rules.
inline constexpr std::array<StemException, 5> kStemExceptions{{
    {"female", "femal"},
    {"gender", "gender"},
    {"individuals", "individu"},
    {"surgeries", "surgeri"},
    {"transgender", "transgend"},
}};

/// Lowercased truncation stem for a single alphabetic word, or nullopt when
/// no rule applies (then no wildcard form is emitted).
std::optional<std::string> wildcard_stem(std::string_view word);

// -- construction -----------------------------------------------------------

/// Variants for an entity surface, in order: quoted phrase, bare exact
/// (single-word surfaces only), wildcard stem (when one exists). All [tiab].
std::vector<TaggedTerm> term_variants(std::string_view surface);

/// Variants for an expansion term: quoted when multiword, otherwise bare
/// exact followed by the wildcard stem for [tiab] terms.
std::vector<TaggedTerm> expansion_variants(std::string_view label, FieldTag tag);

/// AND over one OR group per entry: term_variants, then KG terms, then mask
/// terms, duplicates within a group dropped. Throws EmptyExpansion.
BooleanQuery build_specific_query(const ExpansionSet& exp);

// -- rendering --------------------------------------------------------------

/// Throws InvalidQuery when a structural invariant is violated.
void validate(const BooleanQuery& query);

/// PubMed dialect, e.g. `("Gender"[tiab] OR gender*[tiab]) AND (...)`.
std::string render(const BooleanQuery& query);
std::string render(const TaggedTerm& term);

/// Inverse of render. Whitespace between tokens is free-form, so a query
/// split over several lines parses too. Throws ParseError.
BooleanQuery parse_query(std::string_view rendered);

}  // namespace sysrev
