#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sysrev {

/// A word token with its byte span in the source text.
struct Token {
  std::string text;  // lowercased
  std::size_t start = 0;
  std::size_t end = 0;  // one past the last byte
};

/// Lowercase + collapse internal whitespace + trim. Keys every label lookup.
std::string normalize_label(std::string_view s);

std::string to_lower(std::string_view s);

/// Splits on anything that is not an ASCII letter/digit. Bytes >= 0x80 are
/// kept inside tokens so UTF-8 words stay whole. Hyphens split:
/// "female-to-male" -> {female, to, male}.
std::vector<Token> tokenize(std::string_view s);

/// Token texts only.
std::vector<std::string> token_texts(std::string_view s);

bool contains_whitespace(std::string_view s);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view s);

std::string hex64(std::uint64_t v);

}  // namespace sysrev
