// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fanal {

/// Hashed bag-of-n-grams settings. Word n-grams of every order in
/// [min_order, max_order] are hashed into `dim` buckets with FNV-1a 64.
struct FeatConfig {
  std::uint32_t dim = 1u << 18;
  int min_order = 1;
  int max_order = 2;
  bool l2_normalize = true;

  bool operator==(const FeatConfig&) const = default;
};

inline constexpr std::uint32_t kMinFeatureDim = 1u << 12;

/// Throws ConfigError if dim < kMinFeatureDim or the order range is empty.
void validate(const FeatConfig& config);

/// Sparse vector with entries sorted by strictly increasing index.
struct FeatureVector {
  std::uint32_t dim = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool empty() const noexcept { return entries.empty(); }
  double value(std::uint32_t index) const noexcept;
  double dot(const FeatureVector& other) const noexcept;
  double squared_norm() const noexcept;

  bool operator==(const FeatureVector&) const = default;
};

/// Bucket an n-gram (tokens joined by single spaces) lands in.
std::uint32_t bucket_of(std::string_view ngram, std::uint32_t dim) noexcept;

FeatureVector featurize(std::string_view text, const FeatConfig& config);

nlohmann::json to_json(const FeatConfig& config);
FeatConfig feat_config_from_json(const nlohmann::json& j);

}  // namespace fanal
