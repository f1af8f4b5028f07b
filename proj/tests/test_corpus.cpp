// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fanal/category.hpp"
#include "fanal/error.hpp"
#include "fanal/features.hpp"
#include "fanal/news.hpp"
#include "fanal/random.hpp"
#include "fanal/split.hpp"
#include "fanal/synthetic.hpp"
#include "fanal/text.hpp"

using namespace fanal;

namespace {

ClassCounts uniform_counts(std::size_t n) {
  ClassCounts c;
  c.fill(n);
  return c;
}

std::string line(std::string_view id, std::string_view title) {
  return "{\"id\":\"" + std::string(id) + "\",\"title\":\"" + std::string(title) +
         "\",\"snippet\":\"\",\"source\":\"s\",\"published_at\":\"2024-01-01T00:00:00Z\"}";
}

}  // namespace

TEST(Category, TwelveValuesWithHeadings) {
  EXPECT_EQ(kAllCategories.size(), 12u);
  for (std::size_t i = 0; i < kNumCategories; ++i) EXPECT_EQ(index_of(kAllCategories[i]), i);
  EXPECT_EQ(display_name(Category::MA), "M&A");
  EXPECT_EQ(display_name(Category::CompanyReorganization), "Company Reorganization and Structure Change");
  EXPECT_EQ(display_name(Category::SpinOffSplitOff), "Spin-Off/Split-Off");
  EXPECT_EQ(display_name(Category::Other), "Other");
  for (Category c : kAllCategories) {
    EXPECT_EQ(category_from_name(code_name(c)), c);
    EXPECT_EQ(category_from_name(display_name(c)), c);
    EXPECT_FALSE(definition(c).empty());
  }
  EXPECT_EQ(category_from_name("m&a"), Category::MA);
  EXPECT_FALSE(category_from_name("Mergers").has_value());
}

TEST(ParseJsonl, WellFormedLine) {
  std::istringstream in(
      R"({"id":"a1","title":"X merges Y","snippet":"","source":"s","published_at":"2024-01-01T00:00:00Z"})");
  const auto res = parse_jsonl(in);
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.records[0].id, "a1");
  EXPECT_EQ(res.records[0].title, "X merges Y");
  EXPECT_FALSE(res.records[0].body.has_value());
  EXPECT_TRUE(res.duplicates.empty());
}

TEST(ParseJsonl, EmptyStream) {
  std::istringstream in("");
  EXPECT_TRUE(parse_jsonl(in).records.empty());
}

TEST(ParseJsonl, MissingTitleNamesFieldAndLine) {
  std::istringstream in(line("a", "t") + "\n" +
                        R"({"id":"b","snippet":"","source":"s","published_at":"2024-01-01T00:00:00Z"})");
  try {
    parse_jsonl(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "missing field title at line 2");
  }
}

TEST(ParseJsonl, MissingIdAndMalformedLine) {
  std::istringstream missing_id(R"({"title":"t","published_at":"2024-01-01T00:00:00Z"})");
  EXPECT_THROW(
      {
        try {
          parse_jsonl(missing_id);
        } catch (const DataError& e) {
          EXPECT_STREQ(e.what(), "missing field id at line 1");
          throw;
        }
      },
      DataError);

  std::istringstream bad(line("a", "t") + "\n\n{not json\n");
  try {
    parse_jsonl(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "malformed JSON at line 3");
  }
}

TEST(ParseJsonl, DuplicatesKeepFirstAndAreReported) {
  std::istringstream in(line("a", "first") + "\n" + line("b", "x") + "\n" + line("a", "second") + "\n");
  const auto res = parse_jsonl(in);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.records[0].title, "first");
  ASSERT_EQ(res.duplicates.size(), 1u);
  EXPECT_EQ(res.duplicates[0].id, "a");
  EXPECT_EQ(res.duplicates[0].line, 3u);
}

TEST(ParseJsonl, RejectsBadTimestamp) {
  std::istringstream in(R"({"id":"a","title":"t","published_at":"yesterday"})");
  EXPECT_THROW(parse_jsonl(in), DataError);
}

TEST(Iso8601, AcceptsAndRejects) {
  EXPECT_TRUE(is_iso8601("2024-01-01T00:00:00Z"));
  EXPECT_TRUE(is_iso8601("2024-04-30T23:59:59.123+05:30"));
  EXPECT_TRUE(is_iso8601("2023-10-01T08:00:00-04:00"));
  EXPECT_FALSE(is_iso8601("2024-01-01"));
  EXPECT_FALSE(is_iso8601("2024-13-01T00:00:00Z"));
  EXPECT_FALSE(is_iso8601("2024-01-01T00:00:00"));
  EXPECT_FALSE(is_iso8601("2024-01-01T00:00:00Zjunk"));
  EXPECT_FALSE(is_iso8601("2024-01-01T25:00:00Z"));
}

TEST(LabeledRecord, ProvenanceRules) {
  EXPECT_THROW(Provenance::silver(0.0), DataError);
  EXPECT_THROW(Provenance::predicted(1.5), DataError);
  EXPECT_EQ(Provenance::silver(1.0).confidence(), 1.0);
  EXPECT_FALSE(Provenance::gold().confidence().has_value());

  std::istringstream gold_with_conf(
      R"({"id":"a","title":"t","published_at":"2024-01-01T00:00:00Z","label":"MA","provenance":"gold","confidence":0.5})");
  EXPECT_THROW(parse_labeled_jsonl(gold_with_conf), DataError);
  std::istringstream silver_no_conf(
      R"({"id":"a","title":"t","published_at":"2024-01-01T00:00:00Z","label":"MA","provenance":"silver"})");
  EXPECT_THROW(parse_labeled_jsonl(silver_no_conf), DataError);
}

TEST(Serialization, RoundTripPreservesRecords) {
  // Property: write then re-read reproduces every field, for generated and
  // hand-built records (bodies, unicode, quotes, every provenance kind).
  auto records = generate_synthetic_corpus(uniform_counts(5), 9, {.distractor_rate = 0.5});
  records[0].record.body = "Body with \"quotes\" and unicode \xc3\xa9t\xc3\xa9";
  records[0].record.snippet = "";
  records[1].provenance = Provenance::silver(0.8125);
  records[2].provenance = Provenance::predicted(0.3333333333333333);
  std::ostringstream out;
  write_jsonl(out, records);
  std::istringstream in(out.str());
  const auto back = parse_labeled_jsonl(in);
  EXPECT_EQ(back.records, records);

  std::vector<NewsRecord> plain;
  for (const auto& r : records) plain.push_back(r.record);
  std::ostringstream out2;
  write_jsonl(out2, plain);
  std::istringstream in2(out2.str());
  EXPECT_EQ(parse_jsonl(in2).records, plain);
}

TEST(NewsRecord, TextJoinsTitleAndSnippetOrBody) {
  NewsRecord r{.id = "a", .title = "T", .snippet = "S", .body = "B", .source = "", .published_at = ""};
  EXPECT_EQ(r.text(), "T S");
  r.snippet.clear();
  EXPECT_EQ(r.text(), "T B");
  r.body.reset();
  EXPECT_EQ(r.text(), "T");
}

TEST(Tokenize, OffsetsAndLowercase) {
  const auto toks = tokenize("Debt defaults soared, XYZ says");
  ASSERT_EQ(toks.size(), 5u);
  EXPECT_EQ(toks[3].text, "xyz");
  EXPECT_EQ(toks[3].begin, 22u);
  EXPECT_EQ(toks[3].end, 25u);
  EXPECT_TRUE(tokenize(" ,.;").empty());
}

TEST(Featurize, EmptyTextIsZero) {
  const auto fv = featurize("", FeatConfig{});
  EXPECT_TRUE(fv.empty());
  EXPECT_EQ(fv.dim, 1u << 18);
  EXPECT_TRUE(featurize("  --  ", FeatConfig{}).empty());
}

TEST(Featurize, DeterministicAndNormalized) {
  const std::string t = "Norvex Holdings announces merger with Altura; shares up 4%";
  const auto a = featurize(t, FeatConfig{});
  const auto b = featurize(t, FeatConfig{});
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a.squared_norm(), 1.0, 1e-12);
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_LT(a.entries[i].first, a.dim);
    if (i) EXPECT_LT(a.entries[i - 1].first, a.entries[i].first);
  }
}

TEST(Featurize, FixedPublishedHash) {
  // Frozen from an independent FNV-1a 64 implementation.
  EXPECT_EQ(fnv1a64("merger"), 0xee3412f2ffbed1afULL);
  EXPECT_EQ(bucket_of("merger", 1u << 18), 184751u);
  EXPECT_EQ(bucket_of("x merges", 1u << 18), 154652u);
  const auto fv = featurize("X merges", FeatConfig{});
  EXPECT_GT(fv.value(154652u), 0.0);
}

TEST(Featurize, TermFrequencyBeforeNormalization) {
  FeatConfig raw;
  raw.l2_normalize = false;
  raw.max_order = 1;
  const auto once = featurize("merger", raw);
  const auto twice = featurize("merger merger", raw);
  const auto b = bucket_of("merger", raw.dim);
  EXPECT_DOUBLE_EQ(once.value(b), 1.0);
  EXPECT_DOUBLE_EQ(twice.value(b), 2.0 * once.value(b));
}

TEST(Featurize, RejectsSmallDimension) {
  FeatConfig c;
  c.dim = 1024;
  EXPECT_THROW(featurize("a", c), ConfigError);
}

TEST(SplitStratified, GoldEightyTwenty) {
  const auto gold = generate_synthetic_corpus(uniform_counts(100), 42);
  const auto parts = split_stratified(gold, {0.8, 0.2}, 7);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].size(), 960u);
  EXPECT_EQ(parts[1].size(), 240u);
  for (std::size_t j = 0; j < 2; ++j) {
    std::array<std::size_t, kNumCategories> counts{};
    for (const auto& r : parts[j]) ++counts[index_of(r.label)];
    for (auto n : counts) EXPECT_EQ(n, j == 0 ? 80u : 20u);
  }
}

TEST(SplitStratified, IdentityAndDeterminism) {
  const auto gold = generate_synthetic_corpus(uniform_counts(7), 1);
  const auto one = split_stratified(gold, {1.0}, 3);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], gold);

  const auto a = split_stratified(gold, {0.5, 0.3, 0.2}, 11);
  const auto b = split_stratified(gold, {0.5, 0.3, 0.2}, 11);
  EXPECT_EQ(a, b);
  const auto c = split_stratified(gold, {0.5, 0.3, 0.2}, 12);
  EXPECT_NE(a, c);
}

TEST(SplitStratified, SingletonGoesToFirstSplit) {
  ClassCounts counts{};
  counts[index_of(Category::IPO)] = 1;
  counts[index_of(Category::MA)] = 10;
  const auto recs = generate_synthetic_corpus(counts, 5);
  for (const auto& fr : {std::vector<double>{0.8, 0.2}, std::vector<double>{0.1, 0.9}}) {
    const auto parts = split_stratified(recs, fr, 99);
    bool found = false;
    for (const auto& r : parts[0]) found |= r.label == Category::IPO;
    EXPECT_TRUE(found);
  }
}

TEST(SplitStratified, Errors) {
  EXPECT_THROW(split_stratified({}, {1.0}, 0), DataError);
  const auto recs = generate_synthetic_corpus(uniform_counts(2), 5);
  EXPECT_THROW(split_stratified(recs, {0.5, 0.4}, 0), ConfigError);
  EXPECT_THROW(split_stratified(recs, {1.2, -0.2}, 0), ConfigError);
}

TEST(SplitStratified, ProportionPropertyOnRandomInstances) {
  // |count_j(c)/N_j - count(c)/N| <= 1/N_j for every class and split;
  // every record lands in exactly one split.
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    ClassCounts counts{};
    for (auto& n : counts) n = 2 + rng.index(60);
    const auto recs = generate_synthetic_corpus(counts, rng.next_u64());
    const std::size_t m = 2 + rng.index(3);
    std::vector<double> fr(m);
    double s = 0.0;
    for (auto& f : fr) s += (f = 0.05 + rng.uniform());
    for (auto& f : fr) f /= s;
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < m; ++j) total += fr[j];
    fr[m - 1] = 1.0 - total;

    const auto parts = split_stratified(recs, fr, rng.next_u64());
    const double n_all = static_cast<double>(recs.size());
    std::set<std::string> ids;
    std::size_t seen = 0;
    for (const auto& part : parts) {
      std::array<std::size_t, kNumCategories> cnt{};
      for (const auto& r : part) {
        ++cnt[index_of(r.label)];
        ids.insert(r.record.id);
        ++seen;
      }
      const double nj = static_cast<double>(part.size());
      if (part.empty()) continue;
      for (std::size_t c = 0; c < kNumCategories; ++c) {
        const double diff = std::abs(static_cast<double>(cnt[c]) / nj - static_cast<double>(counts[c]) / n_all);
        EXPECT_LE(diff, 1.0 / nj + 1e-12) << "trial " << trial << " class " << c;
      }
    }
    EXPECT_EQ(seen, recs.size());
    EXPECT_EQ(ids.size(), recs.size());
  }
}

TEST(Synthetic, CountsAndLexicons) {
  ClassCounts counts{};
  counts[index_of(Category::MA)] = 100;
  counts[index_of(Category::Bankruptcy)] = 100;
  const auto recs = generate_synthetic_corpus(counts, 3);
  ASSERT_EQ(recs.size(), 200u);
  std::size_t ma = 0;
  for (const auto& r : recs) {
    EXPECT_EQ(r.provenance, Provenance::gold());
    if (r.label != Category::MA) continue;
    ++ma;
    const auto toks = tokenize(r.record.text());
    bool has_kw = false;
    for (const auto& t : toks) {
      for (auto kw : lexicon(Category::MA)) has_kw |= t.text == kw;
    }
    EXPECT_TRUE(has_kw) << r.record.text();
  }
  EXPECT_EQ(ma, 100u);
  EXPECT_TRUE(generate_synthetic_corpus(ClassCounts{}, 3).empty());
}

TEST(Synthetic, LexiconsAreTokenDisjoint) {
  std::set<std::string> seen;
  for (Category c : kAllCategories) {
    for (auto kw : lexicon(c)) {
      for (const auto& t : tokenize(kw)) EXPECT_TRUE(seen.insert(t.text).second) << t.text;
    }
  }
}

TEST(Synthetic, DeterministicUniqueIds) {
  const auto a = generate_synthetic_corpus(uniform_counts(20), 77, {.distractor_rate = 0.3});
  const auto b = generate_synthetic_corpus(uniform_counts(20), 77, {.distractor_rate = 0.3});
  EXPECT_EQ(a, b);
  std::set<std::string> ids;
  for (const auto& r : a) {
    ids.insert(r.record.id);
    EXPECT_TRUE(is_iso8601(r.record.published_at));
  }
  EXPECT_EQ(ids.size(), a.size());
}
