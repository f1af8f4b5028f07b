// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "fanal/error.hpp"
#include "fanal/text.hpp"

namespace fanal {

std::string_view to_string(UnparseablePolicy p) noexcept {
  switch (p) {
    case UnparseablePolicy::AsOther:
      return "other";
    case UnparseablePolicy::Drop:
      return "drop";
    case UnparseablePolicy::CountAsWrong:
      return "count-as-wrong";
  }
  return "other";
}

UnparseablePolicy unparseable_policy_from_string(std::string_view s) {
  if (iequals(s, "other")) return UnparseablePolicy::AsOther;
  if (iequals(s, "drop")) return UnparseablePolicy::Drop;
  if (iequals(s, "count-as-wrong")) return UnparseablePolicy::CountAsWrong;
  throw ConfigError("bench.unparseable must be one of other, drop, count-as-wrong (got '" + std::string(s) + "')");
}

std::vector<TranscriptEntry> BenchRun::transcript() const {
  std::vector<TranscriptEntry> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.transcript);
  return out;
}

MetricsReport score_entries(const std::vector<BenchEntry>& entries, UnparseablePolicy policy) {
  ConfusionMatrix cm;
  std::size_t dropped_wrong = 0;
  std::array<std::size_t, kNumCategories> missed{};
  for (const auto& e : entries) {
    if (e.parsed) {
      cm.add(e.gold, *e.parsed);
    } else if (policy == UnparseablePolicy::AsOther) {
      cm.add(e.gold, Category::Other);
    } else if (policy == UnparseablePolicy::CountAsWrong) {
      ++missed[index_of(e.gold)];
      ++dropped_wrong;
    }
  }
  if (policy != UnparseablePolicy::CountAsWrong) return metrics(cm);

  // An unparseable answer is a miss for its gold class and a hit for no class.
  const std::size_t n = cm.total() + dropped_wrong;
  if (n == 0) throw DataError("bench: nothing to score");
  std::vector<ClassMetrics> counts(kNumCategories);
  for (Category c : kAllCategories) {
    auto& m = counts[index_of(c)];
    m.tp = cm(c, c);
    m.fp = cm.predicted(c) - m.tp;
    m.fn = cm.support(c) - m.tp + missed[index_of(c)];
    m.support = cm.support(c) + missed[index_of(c)];
  }
  return metrics_from_counts(counts, n);
}

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  std::string response;
  double latency_ms = 0.0;
  bool answered = false;
};

Outcome ask(ChatClient& client, const std::string& prompt, const BenchOptions& opt) {
  Outcome out;
  int delay = opt.backoff_ms;
  for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
    if (attempt > 0 && delay > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay *= 2;
    }
    const auto t0 = Clock::now();
    try {
      out.response = client.send(prompt, opt.params);
      out.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      out.answered = true;
      return out;
    } catch (const TransientClientError&) {
      out.latency_ms += std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    }
  }
  return out;
}

}  // namespace

BenchRun run_benchmark(ChatClient& client, const PromptTemplate& tmpl, const std::vector<LabeledRecord>& dataset,
                       const BenchOptions& options) {
  if (dataset.empty()) throw DataError("bench: dataset is empty");
  if (options.in_flight < 1) throw ConfigError("bench.in_flight must be at least 1");
  if (options.max_retries < 0) throw ConfigError("bench.max_retries must be non-negative");

  BenchRun run;
  run.variant = tmpl.variant;
  run.client_id = client.id();
  run.entries.resize(dataset.size());
  std::vector<char> done(dataset.size(), 0);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex fail_mu;
  std::optional<std::string> failure;

  const auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= dataset.size()) return;
      const auto& rec = dataset[i];
      BenchEntry& e = run.entries[i];
      e.gold = rec.label;
      e.transcript.record_id = rec.record.id;
      e.transcript.prompt = render_prompt(tmpl, rec.record.text());
      try {
        const Outcome o = ask(client, e.transcript.prompt, options);
        e.transcript.latency_ms = o.latency_ms;
        if (o.answered) {
          e.transcript.response = o.response;
          e.parsed = parse_response(o.response);
        }
        e.transcript.parsed = e.parsed ? std::string(display_name(*e.parsed)) : std::string(kUnparseable);
        done[i] = 1;
      } catch (const std::exception& ex) {
        std::lock_guard lock(fail_mu);
        if (!failure) failure = ex.what();
        stop.store(true);
      }
    }
  };

  const auto n_workers = static_cast<std::size_t>(std::min<std::size_t>(options.in_flight, dataset.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (failure) {
    BenchRun partial;
    partial.variant = run.variant;
    partial.client_id = run.client_id;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (done[i]) partial.entries.push_back(std::move(run.entries[i]));
    }
    for (const auto& e : partial.entries) partial.unparseable += e.parsed ? 0 : 1;
    if (!partial.entries.empty()) partial.report = score_entries(partial.entries, options.policy);
    throw BenchAborted("bench aborted: " + *failure, std::move(partial));
  }

  for (const auto& e : run.entries) run.unparseable += e.parsed ? 0 : 1;
  run.report = score_entries(run.entries, options.policy);
  return run;
}

BenchRun replay_benchmark(const std::vector<TranscriptEntry>& transcript, const PromptTemplate& tmpl,
                          const std::vector<LabeledRecord>& dataset, const BenchOptions& options) {
  ReplayClient client(transcript);
  BenchOptions opt = options;
  opt.backoff_ms = 0;
  BenchRun run;
  try {
    run = run_benchmark(client, tmpl, dataset, opt);
  } catch (const BenchAborted& ex) {
    throw DataError(ex.what());
  }
  for (auto& e : run.entries) e.transcript.latency_ms = client.recorded_latency(e.transcript.prompt);
  return run;
}

nlohmann::json to_json(const BenchRun& run) {
  return {{"template", std::string(to_string(run.variant))},
          {"client", run.client_id},
          {"n", run.entries.size()},
          {"unparseable", run.unparseable},
          {"metrics", to_json(run.report)}};
}

}  // namespace fanal
