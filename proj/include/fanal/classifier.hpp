// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fanal/category.hpp"
#include "fanal/features.hpp"
#include "fanal/orpo.hpp"
#include "fanal/silver.hpp"

namespace fanal {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
  double* row(std::size_t r) noexcept { return data.data() + r * cols; }
  const double* row(std::size_t r) const noexcept { return data.data() + r * cols; }

  bool operator==(const Matrix&) const = default;
};

/// scores = W0^T u + bias, where u is the input itself or, with a hidden
/// layer, u = tanh(V^T x + c).
struct SoftmaxClassifier {
  FeatConfig features;
  std::size_t hidden = 0;
  Matrix V;                // input_dim x hidden
  std::vector<double> c;   // hidden
  Matrix W0;               // head_dim x 12
  Logits bias{};

  std::uint32_t input_dim() const noexcept { return features.dim; }
  std::size_t head_dim() const noexcept { return hidden ? hidden : features.dim; }
  std::size_t parameter_count() const noexcept;

  bool operator==(const SoftmaxClassifier&) const = default;
};

/// All head weights and biases start at zero, so the untrained model is
/// uniform. The hidden layer, if any, is drawn from N(0, 0.1^2).
SoftmaxClassifier make_classifier(const FeatConfig& features, std::size_t hidden = 0, std::uint64_t seed = 0);

/// Low-rank update of the head: delta W = B A, B is head_dim x r, A is r x 12.
struct LoraAdapter {
  std::size_t rank = 0;
  Matrix B;
  Matrix A;

  std::size_t trainable_parameters() const noexcept { return B.data.size() + A.data.size(); }

  bool operator==(const LoraAdapter&) const = default;
};

inline constexpr std::array<std::size_t, 2> kLoraRankPresets = {4, 8};

/// A ~ N(0, 0.02^2) from `seed`, B = 0. Throws ConfigError unless 1 <= r < 12.
LoraAdapter lora_wrap(const SoftmaxClassifier& model, std::size_t rank, std::uint64_t seed);

/// Throws DataError when x's dimension differs from the model's.
Logits forward_scores(const SoftmaxClassifier& model, const LoraAdapter* adapter, const FeatureVector& x);
ProbDist forward(const SoftmaxClassifier& model, const LoraAdapter* adapter, const FeatureVector& x);

/// The decision function g.
class DecisionPolicy {
 public:
  static DecisionPolicy argmax() { return DecisionPolicy(); }
  static DecisionPolicy thresholded(ThresholdTable table) { return DecisionPolicy(std::move(table)); }

  const std::optional<ThresholdTable>& thresholds() const noexcept { return table_; }

 private:
  DecisionPolicy() = default;
  explicit DecisionPolicy(ThresholdTable t) : table_(std::move(t)) {}
  std::optional<ThresholdTable> table_;
};

/// argmax (ties to the lowest index), or thresholded argmax with Other as
/// the fallback when no class clears its cutoff.
Category decide(const ProbDist& dist, const DecisionPolicy& policy);

std::pair<Category, double> confidence(const SoftmaxClassifier& model, const LoraAdapter* adapter,
                                       const FeatureVector& x);

/// FNV-1a over the bytes of W0, for freeze checks.
std::uint64_t hash_weights(const Matrix& m) noexcept;

inline constexpr int kClassifierVersion = 1;

nlohmann::json to_json(const SoftmaxClassifier& model);
SoftmaxClassifier classifier_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LoraAdapter& adapter);
LoraAdapter lora_from_json(const nlohmann::json& j);

/// A classifier plus an optional adapter, as written to disk.
struct ClassifierBundle {
  SoftmaxClassifier model;
  std::optional<LoraAdapter> adapter;
};

nlohmann::json to_json(const ClassifierBundle& bundle);
/// Throws FormatError on a wrong format tag or version.
ClassifierBundle classifier_bundle_from_json(const nlohmann::json& j);

}  // namespace fanal
