// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/fixtures.hpp"

#include <filesystem>
#include <fstream>

#include "fanal/error.hpp"
#include "fanal/random.hpp"
#include "fanal/relevance.hpp"
#include "fanal/split.hpp"
#include "fanal/synthetic.hpp"

namespace fs = std::filesystem;

namespace fanal {
namespace {

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

void write_labeled(const fs::path& p, const std::vector<LabeledRecord>& rs) {
  auto out = open_out(p);
  write_jsonl(out, rs);
}

}  // namespace

void write_synthetic_fixture(const std::string& dir, std::size_t per_class, std::uint64_t seed) {
  ClassCounts counts;
  counts.fill(per_class);
  SyntheticOptions opts;
  opts.distractor_rate = 0.3;
  const auto corpus = generate_synthetic_corpus(counts, seed, opts);
  const auto parts = split_stratified(corpus, {0.25, 0.5, 0.25}, derive_seed(seed, "fixture.synthetic"));
  write_labeled(fs::path(dir) / "gold.jsonl", parts[0]);
  {
    auto out = open_out(fs::path(dir) / "pool.jsonl");
    for (const auto& r : parts[1]) {
      auto j = to_json(r.record);
      j["planted_label"] = std::string(display_name(r.label));
      out << j.dump() << '\n';
    }
  }
  write_labeled(fs::path(dir) / "test.jsonl", parts[2]);
}

void write_imbalanced_fixture(const std::string& dir, std::uint64_t seed) {
  ClassCounts counts;
  for (std::size_t k = 0; k < kNumCategories; ++k) counts[k] = k % 2 == 0 ? kImbalancedMajority : kImbalancedMinority;
  SyntheticOptions opts;
  opts.distractor_rate = 0.5;
  opts.id_prefix = "imb";
  const auto corpus = generate_synthetic_corpus(counts, seed, opts);
  const auto parts = split_stratified(corpus, {0.6, 0.2, 0.2}, derive_seed(seed, "fixture.imbalanced"));
  write_labeled(fs::path(dir) / "train.jsonl", parts[0]);
  write_labeled(fs::path(dir) / "val.jsonl", parts[1]);
  write_labeled(fs::path(dir) / "test.jsonl", parts[2]);
}

void write_relevance_fixture(const std::string& dir, std::size_t n, std::uint64_t seed) {
  const auto samples = generate_relevance_fixture(n, seed);
  std::vector<NewsRecord> records;
  std::vector<EntityMention> mentions;
  for (const auto& s : samples) {
    records.push_back(s.record);
    mentions.push_back(s.mention);
  }
  {
    auto out = open_out(fs::path(dir) / "records.jsonl");
    write_jsonl(out, records);
  }
  write_mentions((fs::path(dir) / "mentions.jsonl").string(), mentions);
}

std::vector<std::string> synthetic_fixture_files() { return {"gold.jsonl", "pool.jsonl", "test.jsonl"}; }
std::vector<std::string> imbalanced_fixture_files() { return {"train.jsonl", "val.jsonl", "test.jsonl"}; }
std::vector<std::string> relevance_fixture_files() { return {"records.jsonl", "mentions.jsonl"}; }

}  // namespace fanal
