// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fanal {

/// Balanced keyword-planted corpus, per_class records per category, dealt
/// into gold.jsonl (25%), pool.jsonl (50%, unlabeled, with the planted
/// label kept in a `planted_label` field) and test.jsonl (25%).
void write_synthetic_fixture(const std::string& dir, std::size_t per_class, std::uint64_t seed);

/// Record counts alternating 10:1 across categories (majority first), split
/// 60/20/20 into train.jsonl, val.jsonl and test.jsonl.
inline constexpr std::size_t kImbalancedMajority = 150;
inline constexpr std::size_t kImbalancedMinority = 15;
void write_imbalanced_fixture(const std::string& dir, std::uint64_t seed);

/// Subject-versus-commentator sentences: records.jsonl and the
/// mentions.jsonl sidecar.
void write_relevance_fixture(const std::string& dir, std::size_t n, std::uint64_t seed);

/// Files each writer produces, relative to its directory.
std::vector<std::string> synthetic_fixture_files();
std::vector<std::string> imbalanced_fixture_files();
std::vector<std::string> relevance_fixture_files();

}  // namespace fanal
