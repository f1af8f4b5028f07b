// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include <gtest/gtest.h>

#include <cmath>

#include "fanal/cost.hpp"
#include "fanal/error.hpp"
#include "fanal/metrics.hpp"
#include "fanal/random.hpp"

using namespace fanal;

namespace {

using Pairs = std::vector<std::pair<Category, Category>>;

Pairs random_pairs(Rng& rng, std::size_t n) {
  Pairs out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = category_at(rng.index(12));
    // Skewed toward correct predictions so every regime shows up.
    const auto p = rng.uniform() < 0.6 ? g : category_at(rng.index(12));
    out.emplace_back(g, p);
  }
  return out;
}

}  // namespace

TEST(Confusion, Basics) {
  const Pairs diag = {{Category::MA, Category::MA}, {Category::IPO, Category::IPO}};
  const auto cm = confusion(diag);
  EXPECT_EQ(cm(Category::MA, Category::MA), 1u);
  EXPECT_EQ(cm.trace(), cm.total());

  const Pairs one = {{Category::MA, Category::IPO}};
  const auto off = confusion(one);
  EXPECT_EQ(off(Category::MA, Category::IPO), 1u);
  EXPECT_EQ(off.trace(), 0u);
  EXPECT_EQ(off.support(Category::MA), 1u);
  EXPECT_EQ(off.predicted(Category::IPO), 1u);

  Rng rng(1);
  const auto pairs = random_pairs(rng, 321);
  EXPECT_EQ(confusion(pairs).total(), 321u);
}

TEST(Metrics, DirectFormula) {
  // TP=9, FP=1, FN=3 for M&A.
  Pairs p(9, {Category::MA, Category::MA});
  p.push_back({Category::Other, Category::MA});
  for (int i = 0; i < 3; ++i) p.push_back({Category::MA, Category::IPO});
  const auto r = metrics(confusion(p));
  EXPECT_DOUBLE_EQ(r[Category::MA].precision, 0.9);
  EXPECT_DOUBLE_EQ(r[Category::MA].recall, 0.75);
  EXPECT_NEAR(r[Category::MA].f1, 2 * 0.9 * 0.75 / 1.65, 1e-15);
  EXPECT_NEAR(r[Category::MA].f1, 0.8182, 1e-4);
  EXPECT_DOUBLE_EQ(r[Category::MA].accuracy_jaccard_style, 9.0 / 13.0);
  EXPECT_EQ(r[Category::MA].support, 12u);

  const auto& empty = r[Category::Bankruptcy];
  EXPECT_EQ(empty.precision, 0.0);
  EXPECT_EQ(empty.recall, 0.0);
  EXPECT_EQ(empty.f1, 0.0);

  EXPECT_THROW(metrics(ConfusionMatrix{}), DataError);
}

TEST(Metrics, MatchesBruteForceRecount) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pairs = random_pairs(rng, 1 + rng.index(500));
    const auto r = metrics(confusion(pairs));
    std::size_t correct = 0;
    double sp = 0, sr = 0, sf = 0;
    int active = 0;
    for (std::size_t k = 0; k < 12; ++k) {
      const auto c = category_at(k);
      std::size_t tp = 0, fp = 0, fn = 0;
      for (const auto& [g, p] : pairs) {
        if (g == c && p == c) ++tp;
        if (g != c && p == c) ++fp;
        if (g == c && p != c) ++fn;
      }
      const double prec = tp + fp ? double(tp) / double(tp + fp) : 0.0;
      const double rec = tp + fn ? double(tp) / double(tp + fn) : 0.0;
      const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      const double jac = tp + fp + fn ? double(tp) / double(tp + fp + fn) : 0.0;
      EXPECT_EQ(r.per_class[k].tp, tp);
      EXPECT_EQ(r.per_class[k].fp, fp);
      EXPECT_EQ(r.per_class[k].fn, fn);
      EXPECT_EQ(r.per_class[k].precision, prec);
      EXPECT_EQ(r.per_class[k].recall, rec);
      EXPECT_EQ(r.per_class[k].f1, f1);
      EXPECT_EQ(r.per_class[k].accuracy_recall_style, rec);
      EXPECT_EQ(r.per_class[k].accuracy_jaccard_style, jac);
      if (prec + rec > 0) EXPECT_LT(std::abs(r.per_class[k].f1 - 2 * prec * rec / (prec + rec)), 1e-12);
      correct += tp;
      if (tp + fn + fp > 0) {
        ++active;
        sp += prec;
        sr += rec;
        sf += f1;
      }
    }
    EXPECT_EQ(r.micro_accuracy, double(correct) / double(pairs.size()));
    EXPECT_EQ(r.macro_precision, sp / active);
    EXPECT_EQ(r.macro_recall, sr / active);
    EXPECT_EQ(r.macro_f1, sf / active);
  }
}

TEST(Metrics, PublishedRowReconciliation) {
  // Precision 98.53%, recall 95.04%, support 141.
  const double precision = 0.9853, recall = 0.9504;
  const std::size_t support = 141;
  const auto tp = static_cast<std::size_t>(std::llround(recall * support));
  const auto fp = static_cast<std::size_t>(std::llround(tp / precision - tp));
  const std::size_t fn = support - tp;
  EXPECT_EQ(tp, 134u);
  EXPECT_EQ(fp, 2u);
  EXPECT_EQ(fn, 7u);

  ConfusionMatrix cm;
  cm.add(Category::Bankruptcy, Category::Bankruptcy, tp);
  cm.add(Category::Other, Category::Bankruptcy, fp);
  cm.add(Category::Bankruptcy, Category::DebtDefault, fn);
  const auto r = metrics(cm);
  EXPECT_NEAR(100.0 * r[Category::Bankruptcy].accuracy_jaccard_style, 93.71, 0.2);
  EXPECT_NEAR(100.0 * r[Category::Bankruptcy].precision, 98.53, 0.01);
  EXPECT_NEAR(100.0 * r[Category::Bankruptcy].recall, 95.04, 0.01);
}

TEST(Metrics, RenderAndJsonRoundTrip) {
  Rng rng(3);
  std::vector<NamedReport> reports;
  for (const char* name : {"gbt", "ce", "orpo", "lora-r4"}) {
    reports.push_back({name, metrics(confusion(random_pairs(rng, 50 + rng.index(300))))});
  }
  const std::string text = render_table(reports);
  EXPECT_EQ(parse_table(text), reports);
  EXPECT_NE(text.find("acc_jaccard"), std::string::npos);
  EXPECT_NE(text.find("acc_recall"), std::string::npos);

  for (const auto& nr : reports) {
    const auto j = nlohmann::json::parse(to_json(nr.report).dump());
    EXPECT_EQ(metrics_report_from_json(j), nr.report);
  }
  EXPECT_THROW(parse_table("nonsense"), FormatError);
  std::vector<NamedReport> bad = {{"two words", reports[0].report}};
  EXPECT_THROW(render_table(bad), FormatError);
}

TEST(MarginReport, PublishedPairAndProperties) {
  const std::vector<ScoredPrediction> a = {{true, 0.9851}};
  const std::vector<ScoredPrediction> b = {{true, 0.6927}};
  const auto r = confidence_margin_report(a, b);
  ASSERT_EQ(r.deltas.size(), 1u);
  EXPECT_NEAR(r.deltas[0], 0.2924, 1e-12);
  EXPECT_DOUBLE_EQ(r.fraction_a_greater, 1.0);

  Rng rng(4);
  std::vector<ScoredPrediction> x;
  for (int i = 0; i < 101; ++i) x.push_back({rng.uniform() < 0.7, rng.uniform()});
  const auto same = confidence_margin_report(x, x);
  for (double d : same.deltas) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(same.fraction_a_greater, 0.0);

  auto y = x;
  std::reverse(y.begin(), y.end());
  const auto rev = confidence_margin_report(y, y);
  EXPECT_NEAR(rev.mean_correct_a, same.mean_correct_a, 1e-15);
  EXPECT_EQ(rev.median_correct_a, same.median_correct_a);

  x.pop_back();
  EXPECT_THROW(confidence_margin_report(x, y), DataError);
}

TEST(CostEstimate, PresetsAndLinearity) {
  const auto fanal_preset = *find_cost_preset("fanal");
  const auto e = cost_estimate(10000, fanal_preset);
  EXPECT_DOUBLE_EQ(e.inference_hours, 0.013);
  EXPECT_DOUBLE_EQ(e.total_cost, 0.0017);

  const auto gpt = cost_estimate(10000, *find_cost_preset("GPT-4o"));
  EXPECT_DOUBLE_EQ(gpt.inference_hours, 1.579);
  EXPECT_DOUBLE_EQ(gpt.total_cost, 204.8675);
  EXPECT_DOUBLE_EQ(cost_estimate(10000, *find_cost_preset("llama-3.1")).total_cost, 0.8363);
  EXPECT_DOUBLE_EQ(cost_estimate(10000, *find_cost_preset("phi-3")).inference_hours, 2.254);

  for (const auto& p : cost_presets()) {
    const auto one = cost_estimate(10000, p), two = cost_estimate(20000, p);
    EXPECT_EQ(two.inference_hours, 2.0 * one.inference_hours);
    EXPECT_EQ(two.total_cost, 2.0 * one.total_cost);
    EXPECT_EQ(cost_estimate_from_json(to_json(two)).total_cost, two.total_cost);
  }

  const auto zero = cost_estimate(0, HourlyMode{0.013, 1.2});
  EXPECT_EQ(zero.inference_hours, 0.0);
  EXPECT_EQ(zero.total_cost, 0.0);

  const auto hourly = cost_estimate(20000, HourlyMode{0.5, 3.0});
  EXPECT_DOUBLE_EQ(hourly.inference_hours, 1.0);
  EXPECT_DOUBLE_EQ(hourly.total_cost, 3.0);

  const auto api = cost_estimate(100, ApiMode{200, 5, 1e-6, 4e-6, 0.0});
  EXPECT_NEAR(api.total_cost, 100 * (200e-6 + 20e-6), 1e-15);

  EXPECT_THROW(cost_estimate(1, HourlyMode{-1.0, 1.0}), ConfigError);
  EXPECT_FALSE(find_cost_preset("bert"));
}
