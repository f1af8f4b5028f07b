// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fanal/orpo.hpp"
#include "fanal/random.hpp"

#include "gradcheck.hpp"

using namespace fanal;

namespace {

// Straight-line reference objective, written independently of the library:
// explicit softmax, explicit odds, explicit sigmoid, in long double.
long double reference_orpo(const Logits& z, Category w, Category l, double lambda) {
  long double m = z[0];
  for (double v : z) m = std::max<long double>(m, v);
  long double s = 0;
  for (double v : z) s += std::exp(static_cast<long double>(v) - m);
  const long double pw = std::exp(z[index_of(w)] - m) / s;
  const long double pl = std::exp(z[index_of(l)] - m) / s;
  const long double odds_ratio = (pw / (1 - pw)) / (pl / (1 - pl));
  const long double sigmoid = 1 / (1 + std::exp(-std::log(odds_ratio)));
  return -std::log(pw) + lambda * -std::log(sigmoid);
}

ProbDist dist_with(Category c, double pc) {
  std::array<double, kNumCategories> p{};
  const double rest = (1.0 - pc) / (kNumCategories - 1);
  p.fill(rest);
  p[index_of(c)] = pc;
  return ProbDist(p);
}

Logits random_logits(Rng& rng, double scale) {
  Logits z{};
  for (auto& v : z) v = scale * rng.gaussian();
  return z;
}

}  // namespace

TEST(LogLikelihood, Anchors) {
  EXPECT_NEAR(log_likelihood(ProbDist{}, Category::IPO), -2.484906649788, 1e-9);
  EXPECT_NEAR(log_likelihood(dist_with(Category::MA, 1.0 - kProbEpsilon), Category::MA), 0.0, 1e-11);
  const double at_eps = log_likelihood(dist_with(Category::Other, 0.0), Category::MA);
  EXPECT_TRUE(std::isfinite(log_likelihood(dist_with(Category::MA, 0.0), Category::MA)));
  EXPECT_NEAR(log_likelihood(dist_with(Category::MA, 0.0), Category::MA), std::log(kProbEpsilon), 1e-12);
  EXPECT_TRUE(std::isfinite(at_eps));
}

TEST(Odds, ValuesAndMonotonicity) {
  EXPECT_DOUBLE_EQ(odds(0.5), 1.0);
  EXPECT_NEAR(odds(0.8), 4.0, 1e-12);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(), q = rng.uniform();
    if (p < q) EXPECT_LT(odds(p), odds(q));
  }
  EXPECT_TRUE(std::isfinite(odds(1.0)));
  EXPECT_TRUE(std::isfinite(odds(0.0)));
}

TEST(OddsRatio, ValuesAndReciprocal) {
  EXPECT_DOUBLE_EQ(odds_ratio(0.3, 0.3), 1.0);
  EXPECT_NEAR(odds_ratio(0.8, 0.2), 16.0, 1e-12);
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    EXPECT_NEAR(odds_ratio(a, b) * odds_ratio(b, a), 1.0, 1e-12);
  }
}

TEST(LossOr, ClosedForms) {
  EXPECT_NEAR(loss_or(0.4, 0.4), std::log(2.0), 1e-15);
  // Closed form: sigmoid(ln r) = r / (1 + r), r = 16.
  EXPECT_NEAR(loss_or(0.8, 0.2), std::log(17.0 / 16.0), 1e-12);
  EXPECT_NEAR(loss_or(0.8, 0.2), 0.060625, 1e-6);
  const double near_one = loss_or(1.0 - kProbEpsilon, 0.3);
  EXPECT_GT(near_one, 0.0);
  EXPECT_LT(near_one, 1e-11);
}

TEST(LossOr, MonotoneInBothArguments) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double a = 0.01 + 0.98 * rng.uniform();
    const double b = 0.01 + 0.98 * rng.uniform();
    const double l = loss_or(a, b);
    EXPECT_GT(l, 0.0);
    EXPECT_LT(loss_or(a + 0.005, b), l);
    EXPECT_GT(loss_or(a, b + 0.005), l);
  }
}

TEST(LossOr, SymmetrySumBound) {
  // L(a,b) + L(b,a) >= 2 ln 2, with equality iff a == b.
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    const double s = loss_or(a, b) + loss_or(b, a);
    EXPECT_GE(s, 2.0 * std::log(2.0) - 1e-15);
    if (std::abs(a - b) > 1e-3) EXPECT_GT(s, 2.0 * std::log(2.0));
  }
  EXPECT_NEAR(loss_or(0.2, 0.2) + loss_or(0.2, 0.2), 2.0 * std::log(2.0), 1e-15);
}

TEST(LossOrpo, Anchors) {
  const ProbDist uniform;
  const auto zero = loss_orpo(uniform, Category::MA, Category::IPO, 0.0);
  EXPECT_EQ(zero.total, zero.sft);
  EXPECT_EQ(zero.total, -log_likelihood(uniform, Category::MA));

  const auto one = loss_orpo(uniform, Category::MA, Category::IPO, 1.0);
  EXPECT_NEAR(one.total, std::log(12.0) + std::log(2.0), 1e-9);
  EXPECT_NEAR(one.total, 3.178054, 1e-6);

  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto d = softmax(random_logits(rng, 2.0));
    const double lambda = 3.0 * rng.uniform();
    const auto r = loss_orpo(d, Category::Dividend, Category::Other, lambda);
    EXPECT_GE(r.total, r.sft);
    EXPECT_DOUBLE_EQ(r.total, r.sft + lambda * r.odds_ratio);
  }
}

TEST(LossOrpo, LogitRouteMatchesProbabilityRoute) {
  Rng rng(6);
  for (int i = 0; i < 500; ++i) {
    const auto z = random_logits(rng, 2.0);
    const auto w = category_at(rng.index(12));
    auto l = category_at(rng.index(12));
    if (l == w) l = category_at((index_of(w) + 1) % 12);
    const auto a = loss_orpo_logits(z, w, l, 1.5);
    const auto b = loss_orpo(softmax(z), w, l, 1.5);
    EXPECT_NEAR(a.sft, b.sft, 1e-10);
    EXPECT_NEAR(a.odds_ratio, b.odds_ratio, 1e-10);
    EXPECT_NEAR(a.total, static_cast<double>(reference_orpo(z, w, l, 1.5)), 1e-10);
  }
}

TEST(GradOrpo, MatchesCentralDifferences) {
  Rng rng(7);
  double worst = 0.0;
  int n = 0;
  for (double lambda : {0.0, 0.5, 1.0, 5.0}) {
    for (int i = 0; i < 25; ++i, ++n) {
      const auto z = random_logits(rng, 1.5);
      const auto w = category_at(rng.index(12));
      auto l = category_at(rng.index(11));
      if (index_of(l) >= index_of(w)) l = category_at(index_of(l) + 1);
      const Logits g = grad_orpo(z, w, l, lambda);
      const Logits fd = check::central_difference(
          [&](const Logits& x) { return reference_orpo(x, w, l, lambda); }, z, 1e-5);
      worst = std::max(worst, check::relative_error(g, fd));
    }
  }
  EXPECT_EQ(n, 100);
  EXPECT_LT(worst, 1e-6);
}

TEST(GradOrpo, LambdaZeroIsCrossEntropy) {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto z = random_logits(rng, 3.0);
    const auto w = category_at(i % 12), l = category_at((i + 5) % 12);
    const Logits a = grad_orpo(z, w, l, 0.0);
    const Logits b = grad_cross_entropy(z, w);
    for (std::size_t k = 0; k < kNumCategories; ++k) EXPECT_LE(std::abs(a[k] - b[k]), 1e-12);
    EXPECT_EQ(loss_orpo_logits(z, w, l, 0.0).total, cross_entropy_logits(z, w));
  }
}

TEST(GradOrpo, SignsOnChosenAndRejected) {
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const auto z = random_logits(rng, 2.0);
    const auto w = category_at(rng.index(12));
    const auto l = category_at((index_of(w) + 1 + rng.index(11)) % 12);
    const Logits g = grad_orpo(z, w, l, 0.5 + rng.uniform());
    EXPECT_LT(g[index_of(w)], 0.0);
    EXPECT_GT(g[index_of(l)], 0.0);
  }
}

TEST(OrpoDelta, HalfAtEqualProbabilities) {
  EXPECT_NEAR(orpo_delta(0.37, 0.37), 0.5, 1e-15);
  EXPECT_NEAR(orpo_delta(0.8, 0.2), 1.0 / 17.0, 1e-12);
}

TEST(Clamping, NoNonFiniteValuesOnDegenerateInputs) {
  Rng rng(10);
  for (int i = 0; i < 10000; ++i) {
    std::array<double, kNumCategories> p{};
    const auto hot = rng.index(12);
    const int mode = static_cast<int>(rng.index(3));
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      p[k] = mode == 0 ? (k == hot ? 1.0 : 0.0) : mode == 1 ? rng.uniform() : 0.0;
    }
    const ProbDist d(p);
    const auto w = category_at(rng.index(12)), l = category_at(rng.index(12));
    const auto r = loss_orpo(d, w, l, 5.0 * rng.uniform());
    ASSERT_TRUE(std::isfinite(r.total) && std::isfinite(r.sft) && std::isfinite(r.odds_ratio));
    ASSERT_TRUE(std::isfinite(odds_ratio(d[w], d[l])));

    Logits z{};
    for (auto& v : z) v = (rng.uniform() - 0.5) * 2000.0;
    const auto lr = loss_orpo_logits(z, w, l, 1.0);
    ASSERT_TRUE(std::isfinite(lr.total));
    for (double gk : grad_orpo(z, w, l, 1.0)) ASSERT_TRUE(std::isfinite(gk));
  }
}

TEST(Softmax, ValidDistribution) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto d = softmax(random_logits(rng, 50.0));
    EXPECT_TRUE(d.is_valid());
  }
  EXPECT_EQ(softmax(Logits{}), ProbDist{});
}

TEST(SelectRejected, HardestNegativeIsRunnerUp) {
  std::array<double, kNumCategories> p{};
  p.fill(0.01);
  p[index_of(Category::IPO)] = 0.6;
  p[index_of(Category::Dividend)] = 0.2;
  p[index_of(Category::Other)] = 0.1;
  const ProbDist d(p);
  EXPECT_EQ(select_rejected(d, Category::IPO, RejectedPolicy::HardestNegative, 0), Category::Dividend);
  EXPECT_EQ(select_rejected(d, Category::Dividend, RejectedPolicy::HardestNegative, 0), Category::IPO);
  // Tie among the rest goes to the lowest index.
  EXPECT_EQ(select_rejected(ProbDist{}, Category::MA, RejectedPolicy::HardestNegative, 0),
            Category::PublicMarketFinance);
}

TEST(SelectRejected, TwoClassRestriction) {
  CategorySet two;
  two.set(index_of(Category::Bankruptcy));
  two.set(index_of(Category::DebtDefault));
  for (auto policy : {RejectedPolicy::HardestNegative, RejectedPolicy::UniformRandom, RejectedPolicy::RoundRobin}) {
    for (std::size_t e = 0; e < 5; ++e) {
      EXPECT_EQ(select_rejected(ProbDist{}, Category::Bankruptcy, policy, e, e, two), Category::DebtDefault);
    }
  }
  CategorySet one;
  one.set(index_of(Category::Bankruptcy));
  EXPECT_THROW(select_rejected(ProbDist{}, Category::Bankruptcy, RejectedPolicy::HardestNegative, 0, 0, one),
               std::invalid_argument);
}

TEST(SelectRejected, UniformRandomIsSeeded) {
  RejectedSelector a(RejectedPolicy::UniformRandom, 123);
  RejectedSelector b(RejectedPolicy::UniformRandom, 123);
  std::array<std::size_t, kNumCategories> hist{};
  for (int i = 0; i < 2000; ++i) {
    const auto x = a.select(ProbDist{}, Category::MA);
    EXPECT_EQ(x, b.select(ProbDist{}, Category::MA));
    EXPECT_NE(x, Category::MA);
    ++hist[index_of(x)];
  }
  for (std::size_t k = 1; k < kNumCategories; ++k) EXPECT_GT(hist[k], 100u);
}

TEST(SelectRejected, RoundRobinCyclesThroughOthersPerEpoch) {
  RejectedSelector sel(RejectedPolicy::RoundRobin, 0);
  std::vector<Category> seen;
  for (std::size_t e = 0; e < 11; ++e) {
    sel.set_epoch(e);
    seen.push_back(sel.select(ProbDist{}, Category::IPO));
  }
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(std::unique(seen.begin(), seen.end()), seen.end());
  EXPECT_EQ(seen.size(), 11u);
  EXPECT_EQ(std::count(seen.begin(), seen.end(), Category::IPO), 0);
  sel.set_epoch(11);
  const auto wrap = sel.select(ProbDist{}, Category::IPO);
  sel.set_epoch(0);
  EXPECT_EQ(wrap, sel.select(ProbDist{}, Category::IPO));
}

TEST(RejectedPolicy, StringRoundTrip) {
  for (auto p : {RejectedPolicy::HardestNegative, RejectedPolicy::UniformRandom, RejectedPolicy::RoundRobin}) {
    EXPECT_EQ(rejected_policy_from_string(to_string(p)), p);
  }
  EXPECT_ANY_THROW(rejected_policy_from_string("nearest"));
}
