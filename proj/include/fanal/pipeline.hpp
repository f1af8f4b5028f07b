// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fanal/bench.hpp"
#include "fanal/classifier.hpp"
#include "fanal/config.hpp"
#include "fanal/features.hpp"
#include "fanal/gbt.hpp"
#include "fanal/train.hpp"

namespace fanal {

enum class ThresholdMode { Calibrate, Reference };
enum class EvalPolicy { Argmax, Thresholded };

struct BenchSettings {
  TemplateVariant variant = TemplateVariant::T3;
  std::string client = "stub";  // stub | replay | http
  std::string replay_path;      // transcript to replay; empty means the run's own transcript
  double stub_noise = 0.0;
  BenchOptions options;
  HttpClientConfig http;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string corpus_path;  // gold-labeled JSONL
  std::string pool_path;    // unlabeled JSONL for silver expansion
  std::optional<std::string> test_path;
  std::string out_dir;

  FeatConfig features;
  /// Gold split: (train, validation) with a separate test file, or
  /// (train, validation, test).
  std::vector<double> split_fractions{0.8, 0.2};
  GbtParams gbt;

  ThresholdMode threshold_mode = ThresholdMode::Calibrate;
  double target_precision = 0.95;
  double grid_step = 0.01;

  TrainConfig train;
  std::size_t hidden = 0;
  std::vector<std::size_t> lora_ranks{4, 8};
  TrainConfig lora;

  EvalPolicy eval_policy = EvalPolicy::Argmax;
  BenchSettings bench;

  std::string config_path;
  std::string config_sha256;  // of the file bytes
  Config raw;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

/// Reads and validates a pipeline config. Referenced input files must
/// exist. Unknown keys are rejected. Throws ConfigError naming the key.
PipelineConfig load_pipeline_config(const std::string& path, const ConfigOverrides& overrides = {});

/// Names of the training regimes in output order: ce, orpo, lora-r<k>...
std::vector<std::string> regime_names(const PipelineConfig& cfg);

/// Runs the stages against an artifact directory. Every stage reads its
/// inputs from files written by earlier stages, so stages can also be run
/// one at a time. With `resume`, a stage whose inputs and settings hash to
/// the key recorded by a previous run, and whose outputs still exist, is
/// skipped.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, bool resume, std::ostream& log);

  void ingest();        // validates inputs, writes the gold splits
  void train_silver();  // gradient-boosted silver labeler
  void calibrate();     // per-class threshold table
  void silver_label();  // silver set and histogram
  void train();         // CE, ORPO and adapter classifiers
  void eval();          // metrics tables and the confidence-margin report
  void report();        // human-readable summary plus cost estimate
  void write_manifest();
  void run_all();

  /// Runs the configured client on the gold test split and writes the
  /// transcript and metrics under bench/.
  BenchRun bench();

  const PipelineConfig& config() const noexcept { return cfg_; }
  std::string path(const std::string& relative) const;

 private:
  bool up_to_date(const std::string& stage, const std::string& key, const std::vector<std::string>& outputs);
  void record(const std::string& stage, const std::string& key);
  std::string stage_key(const std::string& stage) const;
  std::string stored_key(const std::string& stage) const;

  PipelineConfig cfg_;
  bool resume_;
  std::ostream& log_;
};

/// Artifact JSON with volatile fields (timestamps) removed, for
/// determinism comparisons.
nlohmann::json strip_volatile(nlohmann::json j);

}  // namespace fanal
