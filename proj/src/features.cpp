// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/features.hpp"

#include <algorithm>
#include <cmath>

#include "fanal/error.hpp"
#include "fanal/text.hpp"

namespace fanal {

void validate(const FeatConfig& config) {
  if (config.dim < kMinFeatureDim) {
    throw ConfigError("features.dim must be at least " + std::to_string(kMinFeatureDim));
  }
  if (config.min_order < 1 || config.max_order < config.min_order) {
    throw ConfigError("features n-gram orders must satisfy 1 <= min_order <= max_order");
  }
}

double FeatureVector::value(std::uint32_t index) const noexcept {
  const auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                   [](const auto& e, std::uint32_t i) { return e.first < i; });
  return (it != entries.end() && it->first == index) ? it->second : 0.0;
}

double FeatureVector::dot(const FeatureVector& other) const noexcept {
  double acc = 0.0;
  auto a = entries.begin();
  auto b = other.entries.begin();
  while (a != entries.end() && b != other.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      acc += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return acc;
}

double FeatureVector::squared_norm() const noexcept {
  double acc = 0.0;
  for (const auto& [i, v] : entries) acc += v * v;
  return acc;
}

std::uint32_t bucket_of(std::string_view ngram, std::uint32_t dim) noexcept {
  return static_cast<std::uint32_t>(fnv1a64(ngram) % dim);
}

FeatureVector featurize(std::string_view text, const FeatConfig& config) {
  validate(config);
  const auto tokens = tokenize(text);

  std::vector<std::uint32_t> buckets;
  std::string gram;
  for (int order = config.min_order; order <= config.max_order; ++order) {
    const auto n = static_cast<std::size_t>(order);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      gram.clear();
      for (std::size_t k = 0; k < n; ++k) {
        if (k) gram.push_back(' ');
        gram += tokens[i + k].text;
      }
      buckets.push_back(bucket_of(gram, config.dim));
    }
  }
  std::sort(buckets.begin(), buckets.end());

  FeatureVector fv;
  fv.dim = config.dim;
  for (std::size_t i = 0; i < buckets.size();) {
    std::size_t j = i;
    while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
    fv.entries.emplace_back(buckets[i], static_cast<double>(j - i));
    i = j;
  }
  if (config.l2_normalize && !fv.entries.empty()) {
    const double norm = std::sqrt(fv.squared_norm());
    for (auto& e : fv.entries) e.second /= norm;
  }
  return fv;
}

nlohmann::json to_json(const FeatConfig& config) {
  return {{"dim", config.dim},
          {"min_order", config.min_order},
          {"max_order", config.max_order},
          {"l2_normalize", config.l2_normalize}};
}

FeatConfig feat_config_from_json(const nlohmann::json& j) {
  FeatConfig c;
  c.dim = j.at("dim").get<std::uint32_t>();
  c.min_order = j.at("min_order").get<int>();
  c.max_order = j.at("max_order").get<int>();
  c.l2_normalize = j.at("l2_normalize").get<bool>();
  validate(c);
  return c;
}

}  // namespace fanal
