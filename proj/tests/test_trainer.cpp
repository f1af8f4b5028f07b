// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include <gtest/gtest.h>

#include <cmath>

#include "fanal/classifier.hpp"
#include "fanal/error.hpp"
#include "fanal/random.hpp"
#include "fanal/synthetic.hpp"
#include "fanal/train.hpp"

#include "gradcheck.hpp"

using namespace fanal;

namespace {

FeatConfig small_features() {
  FeatConfig fc;
  fc.dim = 1u << 12;
  return fc;
}

std::vector<LabeledVector> synthetic(std::size_t per_class, std::uint64_t seed, const FeatConfig& fc,
                                     double distractors = 0.0) {
  ClassCounts counts;
  counts.fill(per_class);
  SyntheticOptions opts;
  opts.distractor_rate = distractors;
  return featurize_all(generate_synthetic_corpus(counts, seed, opts), fc);
}

double accuracy(const ClassifierBundle& b, std::span<const LabeledVector> data) {
  std::size_t ok = 0;
  for (const auto& [x, y] : data) ok += forward(b.model, b.adapter ? &*b.adapter : nullptr, x).argmax() == y;
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

// A tiny model built by hand (dimension 16 is below the featurizer minimum).
SoftmaxClassifier tiny_model(std::size_t hidden, Rng& rng) {
  SoftmaxClassifier m;
  m.features.dim = 16;
  m.hidden = hidden;
  if (hidden) {
    m.V = Matrix(16, hidden);
    m.c.assign(hidden, 0.0);
    for (double& v : m.V.data) v = 0.5 * rng.gaussian();
    for (double& v : m.c) v = 0.3 * rng.gaussian();
  }
  m.W0 = Matrix(m.head_dim(), kNumCategories);
  for (double& v : m.W0.data) v = 0.5 * rng.gaussian();
  for (double& v : m.bias) v = 0.3 * rng.gaussian();
  return m;
}

FeatureVector tiny_input(Rng& rng) {
  FeatureVector x;
  x.dim = 16;
  for (std::uint32_t i = 0; i < 16; ++i) {
    if (rng.uniform() < 0.5) x.entries.emplace_back(i, rng.uniform());
  }
  return x;
}

}  // namespace

TEST(Forward, ZeroWeightsGiveUniform) {
  const auto m = make_classifier(small_features());
  FeatureVector x = featurize("Acme acquires Beta", small_features());
  EXPECT_EQ(forward(m, nullptr, x), ProbDist{});
  const auto [c, p] = confidence(m, nullptr, x);
  EXPECT_EQ(c, Category::MA);
  EXPECT_DOUBLE_EQ(p, 1.0 / 12.0);
}

TEST(Forward, DimensionMismatchThrows) {
  const auto m = make_classifier(small_features());
  FeatConfig other;
  other.dim = 1u << 13;
  EXPECT_THROW(forward(m, nullptr, featurize("x", other)), DataError);
}

TEST(Lora, FreshAdapterIsIdentity) {
  Rng rng(1);
  for (std::size_t hidden : {0, 6}) {
    auto m = make_classifier(small_features(), hidden, 3);
    for (double& v : m.W0.data) v = rng.gaussian();
    for (std::size_t r : kLoraRankPresets) {
      const auto a = lora_wrap(m, r, 9);
      for (int i = 0; i < 20; ++i) {
        const auto x = featurize("news " + std::to_string(i) + " merger dividend", small_features());
        const auto base = forward_scores(m, nullptr, x);
        const auto adapted = forward_scores(m, &a, x);
        for (std::size_t k = 0; k < kNumCategories; ++k) EXPECT_EQ(base[k], adapted[k]);
        EXPECT_NEAR(forward(m, &a, x).sum(), 1.0, 1e-9);
      }
    }
  }
}

TEST(Lora, TrainableParameterCount) {
  FeatConfig fc;
  fc.dim = 4096;
  // A hidden layer of width 256 gives a head with d = 256.
  const auto m = make_classifier(fc, 256, 1);
  for (std::size_t r : kLoraRankPresets) {
    EXPECT_EQ(lora_wrap(m, r, 0).trainable_parameters(), r * (256 + 12));
  }
  EXPECT_EQ(lora_wrap(m, 8, 0).trainable_parameters(), 2144u);
  EXPECT_EQ(m.W0.data.size(), 3072u);
  EXPECT_THROW(lora_wrap(m, 0, 0), ConfigError);
  EXPECT_THROW(lora_wrap(m, 12, 0), ConfigError);
}

TEST(Backprop, MatchesFiniteDifferencesOnFullGraph) {
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t hidden = trial % 2 ? 5 : 0;
    auto model = tiny_model(hidden, rng);
    LoraAdapter adapter = lora_wrap(model, 3, trial);
    for (double& v : adapter.B.data) v = 0.3 * rng.gaussian();
    const bool with_adapter = trial % 3 != 0;
    const auto x = tiny_input(rng);
    const auto y = category_at(rng.index(12));
    TrainConfig cfg;
    cfg.loss = trial % 4 < 2 ? LossKind::Orpo : LossKind::CrossEntropy;
    cfg.orpo.lambda = 0.5 + trial * 0.3;
    const LoraAdapter* ad = with_adapter ? &adapter : nullptr;

    const auto loss_of = [&](const SoftmaxClassifier& m, const LoraAdapter* a) {
      return example_loss(forward_scores(m, a, x), y, cfg, nullptr);
    };
    const auto base = loss_of(model, ad);
    Gradients g = Gradients::like(model, ad);
    backprop(model, ad, x, base.grad, true, g);

    // Hold the rejected label fixed while perturbing.
    const auto objective = [&](const SoftmaxClassifier& m, const LoraAdapter* a) -> long double {
      const auto z = forward_scores(m, a, x);
      if (cfg.loss == LossKind::CrossEntropy) return cross_entropy_logits(z, y);
      return loss_orpo_logits(z, y, base.rejected, cfg.orpo.lambda).total;
    };
    const auto check_block = [&](std::vector<double>& params, const std::vector<double>& analytic) {
      const auto numeric = check::central_difference(
          [&](const std::vector<double>& p) {
            const auto saved = params;
            params = p;
            const long double v = objective(model, ad);
            params = saved;
            return v;
          },
          params, 1e-5);
      worst = std::max(worst, check::relative_error(analytic, numeric));
    };
    check_block(model.W0.data, g.W0.data);
    std::vector<double> bias(model.bias.begin(), model.bias.end());
    const auto bias_numeric = check::central_difference(
        [&](const std::vector<double>& p) {
          const auto saved = model.bias;
          std::copy(p.begin(), p.end(), model.bias.begin());
          const long double v = objective(model, ad);
          model.bias = saved;
          return v;
        },
        bias, 1e-5);
    worst = std::max(worst, check::relative_error(std::vector<double>(g.bias.begin(), g.bias.end()), bias_numeric));
    if (hidden) {
      check_block(model.V.data, g.V.data);
      check_block(model.c, g.c);
    }
    if (with_adapter) {
      check_block(adapter.A.data, g.A.data);
      check_block(adapter.B.data, g.B.data);
    }
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Decide, PoliciesAndTies) {
  std::array<double, kNumCategories> p{};
  p.fill(0.02);
  p[index_of(Category::IPO)] = 0.78;
  const ProbDist ipo(p);
  EXPECT_EQ(decide(ipo, DecisionPolicy::argmax()), Category::IPO);
  ThresholdTable strict;
  strict.set(Category::IPO, 0.9);
  EXPECT_EQ(decide(ipo, DecisionPolicy::thresholded(strict)), Category::Other);
  strict.set(Category::IPO, 0.7);
  EXPECT_EQ(decide(ipo, DecisionPolicy::thresholded(strict)), Category::IPO);

  p.fill(0.0);
  p[index_of(Category::Dividend)] = 0.5;
  p[index_of(Category::PrivatePlacement)] = 0.5;
  EXPECT_EQ(decide(ProbDist(p), DecisionPolicy::argmax()), Category::PrivatePlacement);
}

TEST(Train, LearnsSeparableCorpusAndIsDeterministic) {
  const auto fc = small_features();
  const auto data = synthetic(20, 5, fc);
  const auto val = synthetic(5, 6, fc);
  TrainConfig cfg;
  cfg.seed = 7;
  const auto a = train(make_classifier(fc), std::nullopt, data, val, cfg);
  EXPECT_GE(accuracy(a.final_state, data), 0.99);
  ASSERT_EQ(a.history.epochs.size(), 10u);
  EXPECT_LT(a.history.epochs.back().train_loss, a.history.epochs.front().train_loss);
  const auto b = train(make_classifier(fc), std::nullopt, data, val, cfg);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.final_state.model, b.final_state.model);
  EXPECT_GE(a.history.best_epoch, 1u);
}

TEST(Train, OrpoWithZeroLambdaFollowsCrossEntropyExactly) {
  const auto fc = small_features();
  const auto data = synthetic(6, 8, fc, 0.3);
  const auto val = synthetic(2, 9, fc);
  TrainConfig ce;
  ce.seed = 3;
  ce.epochs = 3;
  TrainConfig orpo = ce;
  orpo.loss = LossKind::Orpo;
  orpo.orpo.lambda = 0.0;
  orpo.orpo.rejected_policy = RejectedPolicy::UniformRandom;

  std::vector<std::vector<double>> trajectory;
  train(make_classifier(fc), std::nullopt, data, val, ce,
        [&](std::size_t, const SoftmaxClassifier& m, const LoraAdapter*) { trajectory.push_back(m.W0.data); });
  std::size_t step = 0;
  double worst = 0.0;
  train(make_classifier(fc), std::nullopt, data, val, orpo,
        [&](std::size_t, const SoftmaxClassifier& m, const LoraAdapter*) {
          const auto& ref = trajectory.at(step++);
          for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(ref[i] - m.W0.data[i]));
        });
  EXPECT_EQ(step, trajectory.size());
  EXPECT_LE(worst, 1e-9);
}

TEST(Train, FrozenBaseIsUntouchedByAdapterTraining) {
  const auto fc = small_features();
  const auto data = synthetic(8, 10, fc);
  const auto val = synthetic(2, 11, fc);
  TrainConfig warm;
  warm.epochs = 2;
  auto base = train(make_classifier(fc), std::nullopt, data, val, warm).final_state.model;
  const auto before = hash_weights(base.W0);
  const auto bias = base.bias;

  TrainConfig cfg;
  cfg.freeze_base = true;
  cfg.loss = LossKind::Orpo;
  const auto adapter = lora_wrap(base, 8, 4);
  const auto res = train(base, adapter, data, val, cfg);
  EXPECT_EQ(hash_weights(res.final_state.model.W0), before);
  EXPECT_EQ(res.final_state.model.bias, bias);
  EXPECT_NE(res.final_state.adapter->B, adapter.B);
  EXPECT_LT(res.history.epochs.back().train_loss, res.history.epochs.front().train_loss);
  EXPECT_THROW(train(base, std::nullopt, data, val, cfg), ConfigError);
}

TEST(Train, Errors) {
  const auto fc = small_features();
  auto data = synthetic(2, 12, fc);
  const auto val = data;
  TrainConfig cfg;
  cfg.learning_rate = 1e300;
  EXPECT_THROW(train(make_classifier(fc), std::nullopt, data, val, cfg), DivergenceError);

  cfg = {};
  std::erase_if(data, [](const LabeledVector& e) { return e.second == Category::Dividend; });
  try {
    train(make_classifier(fc), std::nullopt, data, val, cfg);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("Dividend"), std::string::npos);
  }
  cfg.batch_size = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Serialization, BundleAndHistoryRoundTrip) {
  const auto fc = small_features();
  const auto data = synthetic(3, 13, fc);
  TrainConfig cfg;
  cfg.epochs = 2;
  auto m = make_classifier(fc, 4, 2);
  const auto res = train(m, lora_wrap(m, 4, 1), data, data, cfg);
  const auto j = to_json(res.final_state);
  const auto back = classifier_bundle_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.model, res.final_state.model);
  EXPECT_EQ(back.adapter, res.final_state.adapter);

  auto bad = j;
  bad["version"] = 7;
  EXPECT_THROW(classifier_bundle_from_json(bad), FormatError);

  EXPECT_EQ(TrainHistory::from_csv(res.history.to_csv()), res.history);
  EXPECT_EQ(res.history.to_csv().substr(0, 38), "epoch,train_loss,val_loss,val_macro_f1");
}
