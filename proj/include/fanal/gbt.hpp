// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fanal/category.hpp"
#include "fanal/features.hpp"
#include "fanal/orpo.hpp"

namespace fanal {

/// Multiclass softprob boosting with regression trees.
struct GbtParams {
  double lambda = 1.0;  // L2 penalty on leaf weights
  double gamma = 0.0;   // minimum split gain
  int max_depth = 6;
  double eta = 0.3;
  int n_rounds = 50;
  double min_child_weight = 1.0;
  double colsample = 1.0;  // fraction of active feature buckets offered to each tree
  std::uint64_t seed = 0;
};

/// Throws ConfigError on out-of-range values.
void validate(const GbtParams& params);

/// Node of a regression tree. `feature < 0` marks a leaf. Inner nodes route
/// x[feature] < threshold to `left`; absent features read as 0.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double leaf = 0.0;  // already scaled by eta
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const FeatureVector& x) const noexcept;
  int depth() const noexcept;
};

using LabeledVector = std::pair<FeatureVector, Category>;

struct GbtEnsemble {
  GbtParams params;
  std::vector<std::array<RegressionTree, kNumCategories>> rounds;
  /// Training multiclass log-loss before round 0 and after every round.
  std::vector<double> train_log_loss;

  Logits scores(const FeatureVector& x) const noexcept;
};

/// Second-order boosting: each round fits one tree per class to
/// g = p - onehot(y) and h = p(1 - p) with leaf weight -G/(H + lambda) and
/// exact greedy split search. Feature values must be non-negative.
///
/// Throws DataError listing the missing classes when some category has no
/// example, or when `train` is empty.
GbtEnsemble gbt_fit(std::span<const LabeledVector> train, const GbtParams& params);

/// Softmax over the accumulated per-class scores.
ProbDist gbt_predict_proba(const GbtEnsemble& model, const FeatureVector& x);

double multiclass_log_loss(const GbtEnsemble& model, std::span<const LabeledVector> data);

nlohmann::json to_json(const GbtParams& params);
GbtParams gbt_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GbtEnsemble& model);
GbtEnsemble gbt_from_json(const nlohmann::json& j);

}  // namespace fanal
