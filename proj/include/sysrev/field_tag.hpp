#pragma once

#include <optional>
#include <string_view>

namespace sysrev {

/// PubMed field restriction a term is searched under.
enum class FieldTag { Tiab, Mesh };

/// "[tiab]" / "[Mesh]" spelling used in rendered queries.
constexpr std::string_view tag_suffix(FieldTag tag) { return tag == FieldTag::Mesh ? "[Mesh]" : "[tiab]"; }

/// "TIAB" / "MESH" spelling used in graph files.
constexpr std::string_view tag_name(FieldTag tag) { return tag == FieldTag::Mesh ? "MESH" : "TIAB"; }

inline std::optional<FieldTag> parse_tag_name(std::string_view s) {
  if (s == "TIAB") return FieldTag::Tiab;
  if (s == "MESH") return FieldTag::Mesh;
  return std::nullopt;
}

}  // namespace sysrev
