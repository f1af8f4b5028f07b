// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fanal/classifier.hpp"
#include "fanal/gbt.hpp"
#include "fanal/news.hpp"
#include "fanal/orpo.hpp"

namespace fanal {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

enum class LossKind { CrossEntropy, Orpo };

std::string_view to_string(LossKind k) noexcept;
/// "cross-entropy" or "orpo". Throws ConfigError.
LossKind loss_kind_from_string(std::string_view s);

inline constexpr double kPublishedLearningRate = 5e-5;

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  AdamWConfig adamw;
  LossKind loss = LossKind::CrossEntropy;
  OrpoConfig orpo;
  /// Freeze W0, the bias and any hidden layer; only the adapter trains.
  bool freeze_base = false;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_macro_f1 = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based, lowest validation loss

  /// epoch,train_loss,val_loss,val_macro_f1
  std::string to_csv() const;
  static TrainHistory from_csv(const std::string& text);

  bool operator==(const TrainHistory&) const = default;
};

struct TrainResult {
  ClassifierBundle final_state;
  ClassifierBundle best;
  TrainHistory history;
};

/// Same shapes as the trainable parts of a classifier and adapter.
struct Gradients {
  Matrix V;
  std::vector<double> c;
  Matrix W0;
  Logits bias{};
  Matrix B;
  Matrix A;

  static Gradients like(const SoftmaxClassifier& model, const LoraAdapter* adapter);
  void zero() noexcept;
};

/// Adds d loss / d parameters for one example, given d loss / d logits.
/// Base parameters are skipped when train_base is false.
void backprop(const SoftmaxClassifier& model, const LoraAdapter* adapter, const FeatureVector& x, const Logits& dlogits,
              bool train_base, Gradients& grads);

/// Loss and logit gradient of one example under the configured objective.
struct ExampleLoss {
  double loss = 0.0;
  Logits grad{};
  Category rejected = Category::Other;
};
ExampleLoss example_loss(const Logits& scores, Category y, const TrainConfig& config, RejectedSelector* selector);

/// Called after every optimizer step with the 1-based step number.
using StepObserver = std::function<void(std::size_t, const SoftmaxClassifier&, const LoraAdapter*)>;

/// Minibatch AdamW training. Throws DataError when a class is missing from
/// `data` or `val` is empty, and DivergenceError on a non-finite loss.
TrainResult train(SoftmaxClassifier model, std::optional<LoraAdapter> adapter, std::span<const LabeledVector> data,
                  std::span<const LabeledVector> val, const TrainConfig& config, const StepObserver& observer = {});

std::vector<LabeledVector> featurize_all(std::span<const LabeledRecord> records, const FeatConfig& features);

/// Mean loss of the configured objective (ORPO uses hardest negatives).
double evaluate_loss(const SoftmaxClassifier& model, const LoraAdapter* adapter, std::span<const LabeledVector> data,
                     const TrainConfig& config);

}  // namespace fanal
