// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fanal/error.hpp"
#include "fanal/features.hpp"
#include "fanal/gbt.hpp"
#include "fanal/synthetic.hpp"

using namespace fanal;

namespace {

FeatureVector indicator(std::uint32_t bucket, double value = 1.0) {
  FeatureVector v;
  v.dim = kMinFeatureDim;
  v.entries = {{bucket, value}};
  return v;
}

std::vector<LabeledVector> one_hot_per_class() {
  std::vector<LabeledVector> data;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    data.emplace_back(indicator(static_cast<std::uint32_t>(k)), category_at(k));
  }
  return data;
}

std::vector<LabeledVector> synthetic_vectors(std::size_t per_class, std::uint64_t seed, double distractors) {
  ClassCounts counts;
  counts.fill(per_class);
  SyntheticOptions opts;
  opts.distractor_rate = distractors;
  FeatConfig fc;
  fc.dim = 1u << 14;
  std::vector<LabeledVector> out;
  for (const auto& lr : generate_synthetic_corpus(counts, seed, opts)) {
    out.emplace_back(featurize(lr.record.text(), fc), lr.label);
  }
  return out;
}

}  // namespace

TEST(GbtFit, FirstRoundLeafWeightsMatchHandComputation) {
  // One example per class, class k carried by bucket k alone. With zero
  // initial scores p = 1/12, g = p - y, h = p(1 - p) = 11/144; the tree for
  // class k isolates bucket k, giving leaves
  //   right = -eta * G_R / (H_R + lambda) = 0.3 * (11/12) / (11/144 + 1)
  //   left  = -eta * G_L / (H_L + lambda) = -0.3 * (11/12) / (121/144 + 1).
  const auto data = one_hot_per_class();
  GbtParams p;
  p.n_rounds = 1;
  p.max_depth = 1;
  p.min_child_weight = 0.0;
  const auto model = gbt_fit(data, p);
  ASSERT_EQ(model.rounds.size(), 1u);
  const double right = 0.3 * 132.0 / 155.0;
  const double left = -0.3 * 132.0 / 265.0;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    const auto& tree = model.rounds[0][k];
    EXPECT_EQ(tree.depth(), 1);
    EXPECT_NEAR(tree.predict(indicator(static_cast<std::uint32_t>(k))), right, 1e-12);
    EXPECT_NEAR(tree.predict(indicator(static_cast<std::uint32_t>((k + 1) % 12))), left, 1e-12);
    EXPECT_NEAR(tree.predict(FeatureVector{kMinFeatureDim, {}}), left, 1e-12);
  }
  EXPECT_NEAR(model.train_log_loss.front(), std::log(12.0), 1e-12);
}

TEST(GbtFit, TrainingLossNeverIncreases) {
  const auto data = synthetic_vectors(20, 3, 0.3);
  GbtParams p;
  p.n_rounds = 30;
  p.max_depth = 3;
  const auto model = gbt_fit(data, p);
  ASSERT_EQ(model.train_log_loss.size(), 31u);
  for (std::size_t r = 1; r < model.train_log_loss.size(); ++r) {
    EXPECT_LE(model.train_log_loss[r], model.train_log_loss[r - 1] + 1e-12) << "round " << r;
  }
  EXPECT_NEAR(model.train_log_loss.back(), multiclass_log_loss(model, data), 1e-9);
}

TEST(GbtFit, LearnsSeparableSyntheticClasses) {
  const auto train = synthetic_vectors(30, 11, 0.0);
  const auto test = synthetic_vectors(10, 12, 0.0);
  GbtParams p;
  p.n_rounds = 20;
  p.max_depth = 3;
  const auto model = gbt_fit(train, p);
  std::size_t correct = 0;
  for (const auto& [x, y] : test) {
    const auto d = gbt_predict_proba(model, x);
    EXPECT_TRUE(d.is_valid());
    correct += d.argmax() == y;
  }
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(test.size()), 0.95);
}

TEST(GbtFit, DeterministicUnderSeedIncludingColumnSampling) {
  const auto data = synthetic_vectors(10, 5, 0.3);
  GbtParams p;
  p.n_rounds = 5;
  p.max_depth = 3;
  p.colsample = 0.5;
  p.seed = 99;
  const auto a = gbt_fit(data, p);
  const auto b = gbt_fit(data, p);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  p.seed = 100;
  const auto c = gbt_fit(data, p);
  EXPECT_NE(to_json(a).dump(), to_json(c).dump());
}

TEST(GbtFit, RespectsMaxDepth) {
  const auto data = synthetic_vectors(10, 6, 0.5);
  for (int depth : {1, 2, 4}) {
    GbtParams p;
    p.n_rounds = 3;
    p.max_depth = depth;
    for (const auto& round : gbt_fit(data, p).rounds) {
      for (const auto& tree : round) EXPECT_LE(tree.depth(), depth);
    }
  }
}

TEST(GbtFit, ZeroRoundsGivesUniform) {
  GbtParams p;
  p.n_rounds = 0;
  const auto model = gbt_fit(one_hot_per_class(), p);
  EXPECT_EQ(gbt_predict_proba(model, indicator(3)), ProbDist{});
}

TEST(GbtFit, Errors) {
  GbtParams p;
  EXPECT_THROW(gbt_fit(std::vector<LabeledVector>{}, p), DataError);

  auto data = one_hot_per_class();
  data.pop_back();
  try {
    gbt_fit(data, p);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("missing classes: Other"), std::string::npos) << e.what();
  }

  data = one_hot_per_class();
  data[0].first.entries[0].second = -1.0;
  EXPECT_THROW(gbt_fit(data, p), DataError);

  using Mutator = void (*)(GbtParams&);
  for (Mutator bad : {+[](GbtParams& q) { q.max_depth = 0; }, +[](GbtParams& q) { q.eta = 0.0; },
                   +[](GbtParams& q) { q.colsample = 1.5; }, +[](GbtParams& q) { q.lambda = -1; }}) {
    GbtParams q;
    bad(q);
    EXPECT_THROW(validate(q), ConfigError);
  }
}

TEST(GbtSerialization, RoundTripPreservesPredictions) {
  const auto data = synthetic_vectors(8, 7, 0.3);
  GbtParams p;
  p.n_rounds = 4;
  p.max_depth = 2;
  const auto model = gbt_fit(data, p);
  const auto j = to_json(model);
  EXPECT_EQ(j.at("params").at("objective"), "multi:softprob");
  const auto back = gbt_from_json(nlohmann::json::parse(j.dump()));
  for (const auto& [x, y] : data) {
    EXPECT_EQ(gbt_predict_proba(model, x), gbt_predict_proba(back, x));
  }
  auto broken = j;
  broken["rounds"][0].erase(0);
  EXPECT_THROW(gbt_from_json(broken), FormatError);
}

TEST(GbtFit, HugeL2PenaltyKeepsPredictionsUniform) {
  GbtParams p;
  p.lambda = 1e9;
  p.n_rounds = 5;
  p.min_child_weight = 0.0;
  const auto model = gbt_fit(one_hot_per_class(), p);
  for (std::uint32_t k = 0; k < kNumCategories; ++k) {
    const auto dist = gbt_predict_proba(model, indicator(k));
    for (std::size_t c = 0; c < kNumCategories; ++c) EXPECT_NEAR(dist.at(c), 1.0 / 12.0, 1e-6);
  }
}

TEST(GbtPredict, RandomInputsAlwaysGiveValidDistributions) {
  const auto data = synthetic_vectors(6, 3, 0.2);
  GbtParams p;
  p.n_rounds = 6;
  p.max_depth = 3;
  const auto model = gbt_fit(data, p);
  std::mt19937_64 rng(77);
  for (int i = 0; i < 10000; ++i) {
    FeatureVector x;
    x.dim = 1u << 14;
    const auto nnz = rng() % 12;
    for (std::size_t k = 0; k < nnz; ++k) {
      x.entries.emplace_back(static_cast<std::uint32_t>(rng() % x.dim), static_cast<double>(rng() % 1000) / 100.0);
    }
    std::sort(x.entries.begin(), x.entries.end());
    x.entries.erase(std::unique(x.entries.begin(), x.entries.end(),
                                [](const auto& a, const auto& b) { return a.first == b.first; }),
                    x.entries.end());
    ASSERT_TRUE(gbt_predict_proba(model, x).is_valid()) << i;
  }
}
