// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/orpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fanal/error.hpp"

namespace fanal {
namespace {

// log(1 + e^t) without overflow.
double softplus(double t) noexcept { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double log_odds(double p) noexcept {
  const double q = clamp_prob(p);
  return std::log(q) - std::log1p(-q);
}

CategorySet without(CategorySet s, Category c) {
  s.reset(index_of(c));
  return s;
}

// log odds of class y from logits, and its gradient
// onehot(y) - softmax restricted to the classes other than y.
double log_odds_logits(const Logits& z, Category y, Logits* grad) noexcept {
  const CategorySet rest = without(all_categories(), y);
  const double lse_rest = log_sum_exp(z, rest);
  if (grad) {
    for (std::size_t j = 0; j < kNumCategories; ++j) {
      (*grad)[j] = rest.test(j) ? -std::exp(z[j] - lse_rest) : 1.0;
    }
  }
  return z[index_of(y)] - lse_rest;
}

}  // namespace

ProbDist::ProbDist() { p_.fill(1.0 / static_cast<double>(kNumCategories)); }

Category ProbDist::argmax() const noexcept { return argmax(all_categories()); }

Category ProbDist::argmax(const CategorySet& candidates) const noexcept {
  std::size_t best = kNumCategories;
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (!candidates.test(i)) continue;
    if (best == kNumCategories || p_[i] > p_[best]) best = i;
  }
  return category_at(best == kNumCategories ? 0 : best);
}

double ProbDist::sum() const noexcept {
  double s = 0.0;
  for (double v : p_) s += v;
  return s;
}

bool ProbDist::is_valid() const noexcept {
  for (double v : p_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) return false;
  }
  return std::abs(sum() - 1.0) <= 1e-9;
}

double log_sum_exp(const Logits& z, const CategorySet& mask) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (mask.test(i)) m = std::max(m, z[i]);
  }
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (mask.test(i)) s += std::exp(z[i] - m);
  }
  return m + std::log(s);
}

ProbDist softmax(const Logits& z) {
  const double lse = log_sum_exp(z);
  std::array<double, kNumCategories> p{};
  for (std::size_t i = 0; i < kNumCategories; ++i) p[i] = std::exp(z[i] - lse);
  return ProbDist(p);
}

double clamp_prob(double p) noexcept {
  if (std::isnan(p)) return kProbEpsilon;
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

double log_likelihood(const ProbDist& dist, Category y) noexcept { return std::log(clamp_prob(dist[y])); }

double odds(double p) noexcept {
  const double q = clamp_prob(p);
  return q / (1.0 - q);
}

double odds_ratio(double p_chosen, double p_rejected) noexcept { return odds(p_chosen) / odds(p_rejected); }

double loss_or(double p_chosen, double p_rejected) noexcept {
  return softplus(-(log_odds(p_chosen) - log_odds(p_rejected)));
}

double orpo_delta(double p_chosen, double p_rejected) noexcept {
  // 1 / (1 + OR) = sigmoid(-log OR)
  const double t = log_odds(p_chosen) - log_odds(p_rejected);
  return std::exp(-softplus(t));
}

OrpoLoss loss_orpo(const ProbDist& dist, Category chosen, Category rejected, double lambda) noexcept {
  OrpoLoss out;
  out.sft = -log_likelihood(dist, chosen);
  out.odds_ratio = loss_or(dist[chosen], dist[rejected]);
  out.total = out.sft + lambda * out.odds_ratio;
  return out;
}

OrpoLoss loss_orpo(const ProbDist& dist, const PreferenceInstance& inst, double lambda) noexcept {
  return loss_orpo(dist, inst.chosen, inst.rejected, lambda);
}

OrpoLoss loss_orpo_logits(const Logits& z, Category chosen, Category rejected, double lambda) noexcept {
  OrpoLoss out;
  out.sft = cross_entropy_logits(z, chosen);
  const double log_or = log_odds_logits(z, chosen, nullptr) - log_odds_logits(z, rejected, nullptr);
  out.odds_ratio = softplus(-log_or);
  out.total = lambda == 0.0 ? out.sft : out.sft + lambda * out.odds_ratio;
  return out;
}

double cross_entropy_logits(const Logits& z, Category y) noexcept { return log_sum_exp(z) - z[index_of(y)]; }

Logits grad_cross_entropy(const Logits& z, Category y) noexcept {
  const double lse = log_sum_exp(z);
  Logits g{};
  for (std::size_t j = 0; j < kNumCategories; ++j) g[j] = std::exp(z[j] - lse);
  g[index_of(y)] -= 1.0;
  return g;
}

Logits grad_orpo(const Logits& z, Category chosen, Category rejected, double lambda) noexcept {
  Logits g = grad_cross_entropy(z, chosen);
  if (lambda == 0.0) return g;
  Logits gw{}, gl{};
  const double log_or = log_odds_logits(z, chosen, &gw) - log_odds_logits(z, rejected, &gl);
  // dL_OR/dlogOR = -sigmoid(-logOR) = -delta
  const double delta = std::exp(-softplus(log_or));
  for (std::size_t j = 0; j < kNumCategories; ++j) g[j] += lambda * (-delta) * (gw[j] - gl[j]);
  return g;
}

Logits grad_orpo(const Logits& z, const PreferenceInstance& inst, double lambda) noexcept {
  return grad_orpo(z, inst.chosen, inst.rejected, lambda);
}

std::string_view to_string(RejectedPolicy p) noexcept {
  switch (p) {
    case RejectedPolicy::HardestNegative:
      return "hardest-negative";
    case RejectedPolicy::UniformRandom:
      return "uniform-random";
    case RejectedPolicy::RoundRobin:
      return "round-robin";
  }
  return "hardest-negative";
}

RejectedPolicy rejected_policy_from_string(std::string_view s) {
  for (auto p : {RejectedPolicy::HardestNegative, RejectedPolicy::UniformRandom, RejectedPolicy::RoundRobin}) {
    if (s == to_string(p)) return p;
  }
  throw ConfigError("unknown rejected-label policy '" + std::string(s) + "'");
}

Category RejectedSelector::select(const ProbDist& dist, Category y_true, const CategorySet& candidates) {
  const CategorySet others = without(candidates, y_true);
  if (others.none()) throw std::invalid_argument("select_rejected: no candidate besides the true class");
  switch (policy_) {
    case RejectedPolicy::HardestNegative:
      return dist.argmax(others);
    case RejectedPolicy::UniformRandom:
    case RejectedPolicy::RoundRobin: {
      std::vector<std::size_t> list;
      for (std::size_t i = 0; i < kNumCategories; ++i) {
        if (others.test(i)) list.push_back(i);
      }
      const std::size_t k =
          policy_ == RejectedPolicy::UniformRandom ? rng_.index(list.size()) : epoch_ % list.size();
      return category_at(list[k]);
    }
  }
  return dist.argmax(others);
}

Category select_rejected(const ProbDist& dist, Category y_true, RejectedPolicy policy, std::uint64_t seed,
                         std::size_t epoch, const CategorySet& candidates) {
  RejectedSelector sel(policy, seed);
  sel.set_epoch(epoch);
  return sel.select(dist, y_true, candidates);
}

}  // namespace fanal
