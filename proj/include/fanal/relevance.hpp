// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fanal/news.hpp"

namespace fanal {

/// A pre-tagged entity. [start, end) is a byte span into NewsRecord::text().
struct EntityMention {
  std::string record_id;
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;
  std::optional<bool> relevant;

  bool operator==(const EntityMention&) const = default;
};

/// Throws DataError if the span is out of bounds or does not spell `surface`.
void validate_mention(std::string_view text, const EntityMention& m);

inline constexpr int kRelevanceFeatureVersion = 1;
inline constexpr std::size_t kRelevanceFeatureDim = 6;

enum class RelevanceFeature : std::size_t {
  Position,          // span start / text length
  KeywordDistance,   // tokens to the nearest event keyword, capped at 10, scaled to [0, 1]
  ReportingVerb,     // a reporting verb within 3 tokens after the mention
  PrecededByKeyword, // an event keyword within 3 tokens before the mention
  MentionCount,      // case-insensitive occurrences of the surface in the text
  SentenceInitial,
};

std::string_view feature_name(RelevanceFeature f) noexcept;

using RelevanceFeatures = std::array<double, kRelevanceFeatureDim>;

RelevanceFeatures phi(const NewsRecord& record, const EntityMention& mention);

struct RelevanceModel {
  std::vector<double> W = std::vector<double>(kRelevanceFeatureDim, 0.0);
  double b = 0.0;
  int feature_version = kRelevanceFeatureVersion;
};

/// sigma(W . phi + b). Throws DataError on a dimension or version mismatch.
double relevance_score(const RelevanceModel& model, std::span<const double> features);
bool is_relevant(const RelevanceModel& model, std::span<const double> features, double threshold = 0.5);

struct RelevanceExample {
  RelevanceFeatures x{};
  bool relevant = false;
};

struct RelevanceTrainConfig {
  double lr = 0.5;
  int epochs = 400;
  std::uint64_t seed = 0;
};

struct RelevanceFit {
  RelevanceModel model;
  std::vector<double> losses;  // mean log-loss before each epoch's step, then after the last
};

/// Mean logistic loss and its gradient (W then b) over a batch.
double relevance_loss(const RelevanceModel& model, std::span<const RelevanceExample> data,
                      std::vector<double>* grad = nullptr);

/// Full-batch gradient descent from a small seeded initialization. Throws
/// DataError if only one class is present, DivergenceError if the loss
/// stops being finite.
RelevanceFit train_relevance(std::span<const RelevanceExample> data, const RelevanceTrainConfig& cfg);

nlohmann::json to_json(const RelevanceModel& model);
/// Throws FormatError.
RelevanceModel relevance_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EntityMention& m);
/// Throws DataError.
EntityMention mention_from_json(const nlohmann::json& j, std::size_t line);
std::vector<EntityMention> read_mentions(const std::string& path);
void write_mentions(const std::string& path, const std::vector<EntityMention>& mentions);

struct RelevanceSample {
  NewsRecord record;
  EntityMention mention;
};

/// Seeded subject-versus-commentator sentences. Subjects open the sentence
/// next to an event keyword; commentators follow the event and precede a
/// reporting verb.
std::vector<RelevanceSample> generate_relevance_fixture(std::size_t n, std::uint64_t seed);

/// Labeled feature rows for samples whose mention carries a label.
std::vector<RelevanceExample> featurize_mentions(std::span<const RelevanceSample> samples);

}  // namespace fanal
