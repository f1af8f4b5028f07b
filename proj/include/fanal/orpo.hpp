// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "fanal/category.hpp"
#include "fanal/features.hpp"
#include "fanal/random.hpp"

namespace fanal {

/// Clamp applied to probabilities before logs and odds are taken.
inline constexpr double kProbEpsilon = 1e-12;

using Logits = std::array<double, kNumCategories>;

/// Probability vector over the twelve categories.
class ProbDist {
 public:
  /// Uniform distribution.
  ProbDist();
  explicit ProbDist(const std::array<double, kNumCategories>& p) : p_(p) {}

  double operator[](Category c) const noexcept { return p_[index_of(c)]; }
  double at(std::size_t i) const noexcept { return p_[i]; }
  const std::array<double, kNumCategories>& values() const noexcept { return p_; }

  /// Highest-probability category; ties go to the lowest index.
  Category argmax() const noexcept;
  /// Same, restricted to `candidates`. Precondition: candidates is non-empty.
  Category argmax(const CategorySet& candidates) const noexcept;

  double sum() const noexcept;
  /// Entries finite and in [0, 1], summing to 1 within 1e-9.
  bool is_valid() const noexcept;

  bool operator==(const ProbDist&) const = default;

 private:
  std::array<double, kNumCategories> p_;
};

/// Numerically stable softmax.
ProbDist softmax(const Logits& logits);

/// log of sum of exp over the categories in `mask`.
double log_sum_exp(const Logits& logits, const CategorySet& mask = all_categories());

double clamp_prob(double p) noexcept;

/// log p_y after clamping (sequence length one, so the average over tokens
/// is the single class log-probability).
double log_likelihood(const ProbDist& dist, Category y) noexcept;

/// p / (1 - p) of the clamped probability.
double odds(double p) noexcept;

double odds_ratio(double p_chosen, double p_rejected) noexcept;

/// -log sigmoid(log odds_ratio), evaluated as softplus(-log OR).
double loss_or(double p_chosen, double p_rejected) noexcept;

/// [1 + OR]^-1, the weight on the contrastive gradient term.
double orpo_delta(double p_chosen, double p_rejected) noexcept;

/// A classification example with a favoured and a disfavoured label.
struct PreferenceInstance {
  FeatureVector input;
  Category chosen = Category::Other;
  Category rejected = Category::Other;
};

struct OrpoLoss {
  double total = 0.0;
  double sft = 0.0;         // -log p_chosen
  double odds_ratio = 0.0;  // L_OR, before scaling by lambda
};

/// total = sft + lambda * odds_ratio, from a (clamped) distribution.
OrpoLoss loss_orpo(const ProbDist& dist, Category chosen, Category rejected, double lambda) noexcept;
OrpoLoss loss_orpo(const ProbDist& dist, const PreferenceInstance& inst, double lambda) noexcept;

/// Same objective computed from logits with log-softmax, so no clamping is
/// needed: log odds_y = z_y - logsumexp over the other classes. This is the
/// route the trainer uses.
OrpoLoss loss_orpo_logits(const Logits& logits, Category chosen, Category rejected, double lambda) noexcept;

/// d total / d logits. The NLL part is softmax(z) - onehot(chosen). The
/// odds-ratio part is -delta * (grad log odds_w - grad log odds_l) with
/// grad log odds_y = onehot(y) - softmax over the classes other than y.
/// With lambda == 0 the odds-ratio part is skipped entirely.
Logits grad_orpo(const Logits& logits, Category chosen, Category rejected, double lambda) noexcept;
Logits grad_orpo(const Logits& logits, const PreferenceInstance& inst, double lambda) noexcept;

/// Plain cross-entropy on logits: value and gradient.
double cross_entropy_logits(const Logits& logits, Category y) noexcept;
Logits grad_cross_entropy(const Logits& logits, Category y) noexcept;

enum class RejectedPolicy { HardestNegative, UniformRandom, RoundRobin };

std::string_view to_string(RejectedPolicy p) noexcept;
/// Accepts "hardest-negative", "uniform-random", "round-robin". Throws ConfigError.
RejectedPolicy rejected_policy_from_string(std::string_view s);

struct OrpoConfig {
  double lambda = 1.0;
  RejectedPolicy rejected_policy = RejectedPolicy::HardestNegative;
  std::uint64_t seed = 0;
};

/// Stateful rejected-label picker.
///  - HardestNegative: most probable candidate other than the true class.
///  - UniformRandom: seeded uniform draw among the other candidates.
///  - RoundRobin: in epoch e, the (e mod n)-th of the n other candidates.
class RejectedSelector {
 public:
  RejectedSelector(RejectedPolicy policy, std::uint64_t seed) : policy_(policy), rng_(seed) {}

  /// Throws std::invalid_argument when `candidates` has no class besides y_true.
  Category select(const ProbDist& dist, Category y_true, const CategorySet& candidates = all_categories());

  void set_epoch(std::size_t epoch) noexcept { epoch_ = epoch; }
  std::size_t epoch() const noexcept { return epoch_; }
  RejectedPolicy policy() const noexcept { return policy_; }

 private:
  RejectedPolicy policy_;
  Rng rng_;
  std::size_t epoch_ = 0;
};

/// One-shot form of RejectedSelector::select.
Category select_rejected(const ProbDist& dist, Category y_true, RejectedPolicy policy, std::uint64_t seed,
                         std::size_t epoch = 0, const CategorySet& candidates = all_categories());

}  // namespace fanal
