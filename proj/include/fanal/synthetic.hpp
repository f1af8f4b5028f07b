// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fanal/news.hpp"

namespace fanal {

/// Planted keywords for a category. Lexicons are token-disjoint across
/// categories and disjoint from the shared filler vocabulary.
std::span<const std::string_view> lexicon(Category c) noexcept;

/// Every keyword of every lexicon, in category order.
std::vector<std::string_view> event_keywords();

using ClassCounts = std::array<std::size_t, kNumCategories>;

struct SyntheticOptions {
  /// Probability that a record also mentions one keyword of another
  /// category. Own-category keywords always outnumber the distractor, so the
  /// corpus stays linearly separable.
  double distractor_rate = 0.0;
  std::string id_prefix = "syn";
};

/// Deterministic keyword-planted corpus with exactly counts[c] gold records
/// per category, in a seeded shuffled order.
std::vector<LabeledRecord> generate_synthetic_corpus(const ClassCounts& counts, std::uint64_t seed,
                                                     const SyntheticOptions& options = {});

}  // namespace fanal
