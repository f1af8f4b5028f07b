// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fanal/chat.hpp"
#include "fanal/metrics.hpp"
#include "fanal/news.hpp"
#include "fanal/prompt.hpp"

namespace fanal {

enum class UnparseablePolicy { AsOther, Drop, CountAsWrong };

std::string_view to_string(UnparseablePolicy p) noexcept;
/// "other", "drop" or "count-as-wrong". Throws ConfigError.
UnparseablePolicy unparseable_policy_from_string(std::string_view s);

inline constexpr std::string_view kUnparseable = "Unparseable";

struct BenchOptions {
  UnparseablePolicy policy = UnparseablePolicy::AsOther;
  int max_retries = 3;
  /// First retry waits this long, each later one twice as long.
  int backoff_ms = 200;
  int in_flight = 4;
  ChatParams params;
};

struct BenchEntry {
  TranscriptEntry transcript;
  Category gold = Category::Other;
  std::optional<Category> parsed;
};

struct BenchRun {
  TemplateVariant variant = TemplateVariant::T1;
  std::string client_id;
  std::vector<BenchEntry> entries;
  MetricsReport report;
  std::size_t unparseable = 0;

  std::vector<TranscriptEntry> transcript() const;
};

/// Raised when the client reports itself permanently unavailable. The
/// entries finished before the failure are kept in `partial`.
class BenchAborted : public std::runtime_error {
 public:
  BenchAborted(const std::string& what, BenchRun partial)
      : std::runtime_error(what), partial(std::move(partial)) {}
  BenchRun partial;
};

/// Scores parsed answers under a policy. Throws DataError when nothing is
/// left to score.
MetricsReport score_entries(const std::vector<BenchEntry>& entries, UnparseablePolicy policy);

/// One request per record, issued by up to `in_flight` workers. Entries
/// are kept in dataset order.
BenchRun run_benchmark(ChatClient& client, const PromptTemplate& tmpl, const std::vector<LabeledRecord>& dataset,
                       const BenchOptions& options = {});

/// Rebuilds a run from a saved transcript by replaying it against the
/// same dataset. Throws DataError on a cache miss.
BenchRun replay_benchmark(const std::vector<TranscriptEntry>& transcript, const PromptTemplate& tmpl,
                          const std::vector<LabeledRecord>& dataset, const BenchOptions& options = {});

nlohmann::json to_json(const BenchRun& run);

}  // namespace fanal
