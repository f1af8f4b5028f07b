// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fanal/features.hpp"
#include "fanal/gbt.hpp"
#include "fanal/news.hpp"
#include "fanal/orpo.hpp"

namespace fanal {

/// Per-category minimum probability for accepting a prediction.
class ThresholdTable {
 public:
  /// Every category at 1.0.
  ThresholdTable() { t_.fill(1.0); }

  /// Throws ConfigError unless value is in (0, 1].
  void set(Category c, double value);
  double operator[](Category c) const noexcept { return t_[index_of(c)]; }
  const std::array<double, kNumCategories>& values() const noexcept { return t_; }

  /// Published silver-labeling cutoffs (M&A 0.96, Bankruptcy 0.70, ...).
  static ThresholdTable reference_preset();

  bool operator==(const ThresholdTable&) const = default;

 private:
  std::array<double, kNumCategories> t_;
};

nlohmann::json to_json(const ThresholdTable& table);
ThresholdTable threshold_table_from_json(const nlohmann::json& j);

/// (c, p_c) for c = argmax(dist) iff p_c >= table[c]. Ties on the argmax go
/// to the lowest category index.
std::optional<std::pair<Category, double>> apply_threshold(const ProbDist& dist, const ThresholdTable& table);

struct ScoredExample {
  ProbDist dist;
  Category gold = Category::Other;
};

struct Calibration {
  ThresholdTable table;
  /// Categories whose target precision was not reached at any grid point;
  /// their threshold is 1.0.
  std::vector<Category> unattained;
  /// Precision and number of accepted predictions at the chosen threshold.
  std::array<double, kNumCategories> precision{};
  std::array<std::size_t, kNumCategories> accepted{};
};

/// Precision of {argmax = c and p_c >= t} against the gold labels; nullopt
/// when that set is empty.
std::optional<double> precision_at(std::span<const ScoredExample> validation, Category c, double t);

/// For each class, the smallest grid threshold k * grid_step (k >= 1) whose
/// accepted set is non-empty with precision >= target.
/// Throws DataError on empty validation and ConfigError on a bad grid.
Calibration calibrate_thresholds(std::span<const ScoredExample> validation, double target_precision = 0.95,
                                 double grid_step = 0.01);

/// Scores gold validation records with the model, then calibrates.
Calibration calibrate_thresholds(const GbtEnsemble& model, const FeatConfig& features,
                                 std::span<const LabeledRecord> validation, double target_precision = 0.95,
                                 double grid_step = 0.01);

struct SilverSet {
  std::vector<LabeledRecord> records;
  std::array<std::size_t, kNumCategories> histogram{};
  std::size_t excluded = 0;      // dropped because their id was in exclude_ids
  std::size_t below_threshold = 0;
};

/// Labels every pool record not in exclude_ids and keeps those clearing the
/// threshold of their argmax class, with silver provenance.
SilverSet build_silver_set(std::span<const NewsRecord> pool, const GbtEnsemble& model, const FeatConfig& features,
                           const ThresholdTable& table, const std::unordered_set<std::string>& exclude_ids);

nlohmann::json histogram_json(const std::array<std::size_t, kNumCategories>& histogram);

/// Serialized silver labeler: featurizer settings, trees and thresholds.
struct SilverModel {
  FeatConfig features;
  GbtEnsemble ensemble;
  std::optional<ThresholdTable> thresholds;
};

inline constexpr int kSilverModelVersion = 1;

nlohmann::json to_json(const SilverModel& model);
/// Throws FormatError on a wrong format tag or version.
SilverModel silver_model_from_json(const nlohmann::json& j);

}  // namespace fanal
