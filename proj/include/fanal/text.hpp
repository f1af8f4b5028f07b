// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fanal {

/// ASCII case-insensitive comparison. Non-ASCII bytes compare exactly.
bool iequals(std::string_view a, std::string_view b) noexcept;

std::string to_lower_ascii(std::string_view s);

std::string_view trim(std::string_view s) noexcept;

/// A token and the byte range [begin, end) it occupies in the source text.
struct Token {
  std::string text;  // lowercased
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Lowercases ASCII and splits on runs of non-alphanumeric ASCII bytes.
/// Bytes >= 0x80 are kept inside tokens so UTF-8 words survive intact.
std::vector<Token> tokenize(std::string_view text);

/// FNV-1a, 64-bit. Fixed constants, so hashes are stable across processes.
constexpr std::uint64_t fnv1a64(std::string_view s,
                                std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fanal
