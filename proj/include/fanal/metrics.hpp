// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fanal/category.hpp"

namespace fanal {

/// Rows are gold labels, columns are predictions.
class ConfusionMatrix {
 public:
  void add(Category gold, Category predicted, std::size_t count = 1) noexcept {
    cells_[index_of(gold)][index_of(predicted)] += count;
  }

  std::size_t operator()(Category gold, Category predicted) const noexcept {
    return cells_[index_of(gold)][index_of(predicted)];
  }

  std::size_t support(Category c) const noexcept;    // row sum
  std::size_t predicted(Category c) const noexcept;  // column sum
  std::size_t total() const noexcept;
  std::size_t trace() const noexcept;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::array<std::array<std::size_t, kNumCategories>, kNumCategories> cells_{};
};

ConfusionMatrix confusion(std::span<const std::pair<Category, Category>> gold_predicted);

struct ClassMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy_recall_style = 0.0;   // TP / (TP + FN)
  double accuracy_jaccard_style = 0.0;  // TP / (TP + FP + FN)

  bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
  std::array<ClassMetrics, kNumCategories> per_class{};
  std::size_t n = 0;
  double micro_accuracy = 0.0;
  // Averaged over the classes that occur in gold or predictions.
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;

  const ClassMetrics& operator[](Category c) const noexcept { return per_class[index_of(c)]; }
  bool operator==(const MetricsReport&) const = default;
};

/// Throws DataError when the matrix is empty.
MetricsReport metrics(const ConfusionMatrix& cm);

/// Rebuilds a report from per-class TP/FP/FN counts and N. Every rate in a
/// report is a function of these counts, so this inverts rendering exactly.
MetricsReport metrics_from_counts(std::span<const ClassMetrics> counts, std::size_t n);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

/// One labeled report per model, printed as an aligned table with one row
/// per (model, metric) and one column per category.
struct NamedReport {
  std::string model;
  MetricsReport report;

  bool operator==(const NamedReport&) const = default;
};

std::string render_table(std::span<const NamedReport> reports);
/// Inverse of render_table. Throws FormatError on malformed input.
std::vector<NamedReport> parse_table(const std::string& text);

struct ScoredPrediction {
  bool correct = false;
  double confidence = 0.0;
};

struct MarginReport {
  std::size_t n = 0;
  std::size_t correct_a = 0;
  std::size_t correct_b = 0;
  // Over each model's correct predictions; 0 when it has none.
  double mean_correct_a = 0.0;
  double mean_correct_b = 0.0;
  double median_correct_a = 0.0;
  double median_correct_b = 0.0;
  std::vector<double> deltas;  // confidence_a - confidence_b per sample
  double fraction_a_greater = 0.0;
};

/// Throws DataError when the lists are not the same length.
MarginReport confidence_margin_report(std::span<const ScoredPrediction> a, std::span<const ScoredPrediction> b);

nlohmann::json to_json(const MarginReport& report);

}  // namespace fanal
