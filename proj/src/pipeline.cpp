// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "fanal/cost.hpp"
#include "fanal/error.hpp"
#include "fanal/metrics.hpp"
#include "fanal/random.hpp"
#include "fanal/silver.hpp"
#include "fanal/split.hpp"

namespace fs = std::filesystem;

namespace fanal {
namespace {

constexpr const char* kStages[] = {"ingest", "train-silver", "calibrate", "silver-label", "train", "eval", "report"};

std::string resolve(const Config& raw, const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute()) return path.lexically_normal().string();
  return (fs::path(raw.base_dir()) / path).lexically_normal().string();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::string& path) {
  const auto text = read_text(path);
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError(path + ": malformed JSON");
  return j;
}

void write_records(const std::string& path, const std::vector<LabeledRecord>& records) {
  std::ostringstream ss;
  write_jsonl(ss, records);
  write_text(path, ss.str());
}

std::vector<LabeledRecord> read_records(const std::string& path) {
  if (!fs::exists(path)) throw DataError("missing artifact " + path + " (run the earlier stages first)");
  return read_labeled_jsonl_file(path).records;
}

template <typename F>
auto parse_enum(const Config& raw, std::string_view key, const std::string& fallback, F&& parse) {
  const auto value = raw.get_string(key, fallback);
  try {
    return parse(value);
  } catch (const ConfigError& e) {
    throw ConfigError(raw.source() + ": key '" + std::string(key) + "': " + e.what());
  }
}

std::size_t non_negative(const Config& raw, std::string_view key, std::int64_t fallback) {
  const auto v = raw.get_int(key, fallback);
  if (v < 0) throw ConfigError(raw.source() + ": key '" + std::string(key) + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::string regime_file(const std::string& regime) { return "models/" + regime + ".json"; }

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path, const ConfigOverrides& overrides) {
  PipelineConfig cfg;
  cfg.raw = Config::load(path);
  cfg.config_path = path;
  cfg.config_sha256 = sha256_file(path);
  const Config& raw = cfg.raw;
  const auto& src = raw.source();

  const auto seed = raw.get_int("seed", 0);
  if (seed < 0) throw ConfigError(src + ": key 'seed' must be non-negative");
  cfg.seed = overrides.seed.value_or(static_cast<std::uint64_t>(seed));

  const auto input = [&](const std::string& key) {
    const auto p = resolve(raw, raw.get_string(key));
    if (!fs::is_regular_file(p)) throw ConfigError(src + ": key '" + key + "': file not found: " + p);
    return p;
  };
  cfg.corpus_path = input("paths.corpus");
  cfg.pool_path = input("paths.pool");
  if (raw.has("paths.test")) cfg.test_path = input("paths.test");
  cfg.out_dir = resolve(raw, raw.get_string("paths.out", "runs/default"));
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;

  cfg.features.dim = static_cast<std::uint32_t>(non_negative(raw, "features.dim", cfg.features.dim));
  cfg.features.min_order = static_cast<int>(raw.get_int("features.min_order", cfg.features.min_order));
  cfg.features.max_order = static_cast<int>(raw.get_int("features.max_order", cfg.features.max_order));
  cfg.features.l2_normalize = raw.get_bool("features.l2_normalize", cfg.features.l2_normalize);
  try {
    validate(cfg.features);
  } catch (const ConfigError& e) {
    throw ConfigError(src + ": [features] " + e.what());
  }

  cfg.split_fractions = raw.get_double_list("split.fractions", cfg.test_path ? std::vector<double>{0.8, 0.2}
                                                                              : std::vector<double>{0.7, 0.15, 0.15});
  const std::size_t want = cfg.test_path ? 2 : 3;
  if (cfg.split_fractions.size() != want) {
    throw ConfigError(src + ": key 'split.fractions' needs " + std::to_string(want) +
                      " entries (train, validation" + (cfg.test_path ? "" : ", test") + ")");
  }

  auto& g = cfg.gbt;
  g.lambda = raw.get_double("gbt.lambda", g.lambda);
  g.gamma = raw.get_double("gbt.gamma", g.gamma);
  g.max_depth = static_cast<int>(raw.get_int("gbt.max_depth", g.max_depth));
  g.eta = raw.get_double("gbt.eta", g.eta);
  g.n_rounds = static_cast<int>(raw.get_int("gbt.n_rounds", g.n_rounds));
  g.min_child_weight = raw.get_double("gbt.min_child_weight", g.min_child_weight);
  g.colsample = raw.get_double("gbt.colsample", g.colsample);
  g.seed = derive_seed(cfg.seed, "gbt");
  try {
    validate(g);
  } catch (const ConfigError& e) {
    throw ConfigError(src + ": [gbt] " + e.what());
  }

  cfg.threshold_mode = parse_enum(raw, "silver.thresholds", "calibrate", [](const std::string& s) {
    if (s == "calibrate") return ThresholdMode::Calibrate;
    if (s == "reference") return ThresholdMode::Reference;
    throw ConfigError("expected 'calibrate' or 'reference', got '" + s + "'");
  });
  cfg.target_precision = raw.get_double("silver.target_precision", cfg.target_precision);
  cfg.grid_step = raw.get_double("silver.grid_step", cfg.grid_step);
  if (!(cfg.target_precision > 0.0 && cfg.target_precision <= 1.0)) {
    throw ConfigError(src + ": key 'silver.target_precision' must be in (0, 1]");
  }

  auto& t = cfg.train;
  t.learning_rate = raw.get_double("train.learning_rate", t.learning_rate);
  t.batch_size = non_negative(raw, "train.batch_size", static_cast<std::int64_t>(t.batch_size));
  t.epochs = non_negative(raw, "train.epochs", static_cast<std::int64_t>(t.epochs));
  t.adamw.beta1 = raw.get_double("train.beta1", t.adamw.beta1);
  t.adamw.beta2 = raw.get_double("train.beta2", t.adamw.beta2);
  t.adamw.eps = raw.get_double("train.eps", t.adamw.eps);
  t.adamw.weight_decay = raw.get_double("train.weight_decay", t.adamw.weight_decay);
  t.orpo.lambda = raw.get_double("train.orpo.lambda", t.orpo.lambda);
  t.orpo.rejected_policy = parse_enum(raw, "train.orpo.rejected_policy", "hardest-negative",
                                      [](const std::string& s) { return rejected_policy_from_string(s); });
  t.seed = derive_seed(cfg.seed, "train");
  cfg.hidden = non_negative(raw, "train.hidden", 0);

  cfg.lora = t;
  cfg.lora.freeze_base = true;
  cfg.lora.learning_rate = raw.get_double("train.lora.learning_rate", t.learning_rate);
  cfg.lora.epochs = non_negative(raw, "train.lora.epochs", static_cast<std::int64_t>(t.epochs));
  cfg.lora.loss = parse_enum(raw, "train.lora.loss", "orpo", [](const std::string& s) { return loss_kind_from_string(s); });
  cfg.lora_ranks.clear();
  for (auto r : raw.get_int_list("train.lora.ranks", {4, 8})) {
    if (r < 1 || r >= static_cast<std::int64_t>(kNumCategories)) {
      throw ConfigError(src + ": key 'train.lora.ranks': rank " + std::to_string(r) + " must be in [1, 11]");
    }
    cfg.lora_ranks.push_back(static_cast<std::size_t>(r));
  }
  for (TrainConfig* tc : {&cfg.train, &cfg.lora}) {
    try {
      TrainConfig probe = *tc;
      probe.freeze_base = false;
      validate(probe);
    } catch (const ConfigError& e) {
      throw ConfigError(src + ": [train] " + e.what());
    }
  }

  cfg.eval_policy = parse_enum(raw, "eval.policy", "argmax", [](const std::string& s) {
    if (s == "argmax") return EvalPolicy::Argmax;
    if (s == "thresholded") return EvalPolicy::Thresholded;
    throw ConfigError("expected 'argmax' or 'thresholded', got '" + s + "'");
  });

  auto& b = cfg.bench;
  b.variant = parse_enum(raw, "bench.template", "T3", [](const std::string& s) { return template_variant_from_string(s); });
  b.client = raw.get_string("bench.client", "stub");
  if (b.client != "stub" && b.client != "replay" && b.client != "http") {
    throw ConfigError(src + ": key 'bench.client' must be stub, replay or http");
  }
  if (raw.has("bench.replay")) b.replay_path = resolve(raw, raw.get_string("bench.replay"));
  b.stub_noise = raw.get_double("bench.noise_rate", 0.0);
  b.options.policy = parse_enum(raw, "bench.unparseable", "other",
                                [](const std::string& s) { return unparseable_policy_from_string(s); });
  b.options.max_retries = static_cast<int>(non_negative(raw, "bench.max_retries", b.options.max_retries));
  b.options.backoff_ms = static_cast<int>(non_negative(raw, "bench.backoff_ms", b.options.backoff_ms));
  b.options.in_flight = static_cast<int>(non_negative(raw, "bench.in_flight", b.options.in_flight));
  b.options.params.temperature = raw.get_double("bench.temperature", b.options.params.temperature);
  b.options.params.max_tokens = static_cast<int>(non_negative(raw, "bench.max_tokens", b.options.params.max_tokens));
  b.options.params.timeout_ms = static_cast<int>(non_negative(raw, "bench.timeout_ms", b.options.params.timeout_ms));
  b.http.url = raw.get_string("bench.url", "");
  b.http.model = raw.get_string("bench.model", "");
  b.http.api_key_env = raw.get_string("bench.api_key_env", b.http.api_key_env);

  if (const auto unknown = raw.unused_keys(); !unknown.empty()) {
    throw ConfigError(src + ": unknown key '" + unknown.front() + "'");
  }
  cfg.raw.set("seed", config_int(static_cast<std::int64_t>(cfg.seed)));
  return cfg;
}

std::vector<std::string> regime_names(const PipelineConfig& cfg) {
  std::vector<std::string> out = {"ce", "orpo"};
  for (auto r : cfg.lora_ranks) out.push_back("lora-r" + std::to_string(r));
  return out;
}

Pipeline::Pipeline(PipelineConfig config, bool resume, std::ostream& log)
    : cfg_(std::move(config)), resume_(resume), log_(log) {}

std::string Pipeline::path(const std::string& relative) const { return (fs::path(cfg_.out_dir) / relative).string(); }

std::string Pipeline::stage_key(const std::string& stage) const {
  const Config& raw = cfg_.raw;
  std::string material = "stage=" + stage + "\nseed=" + std::to_string(cfg_.seed) + "\n";
  if (stage == "ingest") {
    material += "corpus=" + sha256_file(cfg_.corpus_path) + "\npool=" + sha256_file(cfg_.pool_path) + "\n";
    if (cfg_.test_path) material += "test=" + sha256_file(*cfg_.test_path) + "\n";
    material += raw.canonical("split");
  } else if (stage == "train-silver") {
    material += stage_key("ingest") + raw.canonical("features") + raw.canonical("gbt");
  } else if (stage == "calibrate") {
    material += stage_key("train-silver") + raw.canonical("silver");
  } else if (stage == "silver-label") {
    material += stage_key("calibrate");
  } else if (stage == "train") {
    material += stage_key("silver-label") + raw.canonical("train");
  } else if (stage == "eval") {
    material += stage_key("train") + raw.canonical("eval");
  } else if (stage == "report") {
    material += stage_key("eval");
  }
  return sha256_hex(material);
}

std::string Pipeline::stored_key(const std::string& stage) const {
  const auto p = path("stages.json");
  if (!fs::exists(p)) return {};
  const auto j = nlohmann::json::parse(read_text(p), nullptr, false);
  if (j.is_discarded() || !j.contains(stage)) return {};
  return j[stage].get<std::string>();
}

bool Pipeline::up_to_date(const std::string& stage, const std::string& key, const std::vector<std::string>& outputs) {
  if (!resume_ || stored_key(stage) != key) return false;
  for (const auto& o : outputs) {
    if (!fs::exists(path(o))) return false;
  }
  log_ << "[" << stage << "] up to date, skipping\n";
  return true;
}

void Pipeline::record(const std::string& stage, const std::string& key) {
  const auto p = path("stages.json");
  nlohmann::json j = nlohmann::json::object();
  if (fs::exists(p)) {
    j = nlohmann::json::parse(read_text(p), nullptr, false);
    if (j.is_discarded() || !j.is_object()) j = nlohmann::json::object();
  }
  j[stage] = key;
  // Later stages depend on this one; drop their stale keys.
  bool after = false;
  for (const char* s : kStages) {
    if (after) j.erase(s);
    if (stage == s) after = true;
  }
  write_json(p, j);
}

void Pipeline::ingest() {
  const auto key = stage_key("ingest");
  const std::vector<std::string> outputs = {"splits/train.jsonl", "splits/val.jsonl", "splits/test.jsonl",
                                            "corpus/summary.json"};
  if (up_to_date("ingest", key, outputs)) return;

  const auto gold = read_labeled_jsonl_file(cfg_.corpus_path);
  const auto pool = read_jsonl_file(cfg_.pool_path);
  for (const auto& d : gold.duplicates) log_ << "[ingest] warning: duplicate gold id " << d.id << " at line " << d.line << "\n";
  for (const auto& d : pool.duplicates) log_ << "[ingest] warning: duplicate pool id " << d.id << " at line " << d.line << "\n";
  for (const auto& r : gold.records) {
    if (r.provenance.kind() != Provenance::Kind::Gold) {
      throw DataError(cfg_.corpus_path + ": record " + r.record.id + " is not gold-labeled");
    }
  }
  if (pool.records.empty()) throw DataError(cfg_.pool_path + ": silver pool is empty");

  auto splits = split_stratified(gold.records, cfg_.split_fractions, derive_seed(cfg_.seed, "split"));
  std::vector<LabeledRecord> test;
  if (cfg_.test_path) {
    test = read_labeled_jsonl_file(*cfg_.test_path).records;
  } else {
    test = std::move(splits[2]);
  }
  if (test.empty()) throw DataError("gold test split is empty");

  write_records(path("splits/train.jsonl"), splits[0]);
  write_records(path("splits/val.jsonl"), splits[1]);
  write_records(path("splits/test.jsonl"), test);

  const auto histogram = [](const std::vector<LabeledRecord>& rs) {
    std::array<std::size_t, kNumCategories> h{};
    for (const auto& r : rs) ++h[index_of(r.label)];
    return histogram_json(h);
  };
  nlohmann::json summary = {{"gold", gold.records.size()},
                            {"gold_duplicates", gold.duplicates.size()},
                            {"pool", pool.records.size()},
                            {"pool_duplicates", pool.duplicates.size()},
                            {"train", histogram(splits[0])},
                            {"val", histogram(splits[1])},
                            {"test", histogram(test)},
                            {"fractions", cfg_.split_fractions}};
  write_json(path("corpus/summary.json"), summary);
  log_ << "[ingest] gold " << gold.records.size() << " -> train " << splits[0].size() << ", val " << splits[1].size()
       << ", test " << test.size() << "; pool " << pool.records.size() << "\n";
  record("ingest", key);
}

void Pipeline::train_silver() {
  const auto key = stage_key("train-silver");
  if (up_to_date("train-silver", key, {"silver/model.json"})) return;
  const auto train = read_records(path("splits/train.jsonl"));
  const auto data = featurize_all(train, cfg_.features);
  SilverModel model;
  model.features = cfg_.features;
  model.ensemble = gbt_fit(data, cfg_.gbt);
  write_json(path("silver/model.json"), to_json(model));
  log_ << "[train-silver] " << cfg_.gbt.n_rounds << " rounds on " << data.size()
       << " records, train log-loss " << multiclass_log_loss(model.ensemble, data) << "\n";
  record("train-silver", key);
}

namespace {

SilverModel load_silver_model(const std::string& p) {
  if (!fs::exists(p)) throw DataError("missing artifact " + p + " (run train-silver first)");
  return silver_model_from_json(read_json(p));
}

ThresholdTable load_thresholds(const std::string& p) {
  if (!fs::exists(p)) throw DataError("missing artifact " + p + " (run calibrate first)");
  return threshold_table_from_json(read_json(p));
}

}  // namespace

void Pipeline::calibrate() {
  const auto key = stage_key("calibrate");
  if (up_to_date("calibrate", key, {"silver/thresholds.json", "silver/calibration.json"})) return;
  const auto model = load_silver_model(path("silver/model.json"));
  nlohmann::json report = {{"mode", cfg_.threshold_mode == ThresholdMode::Calibrate ? "calibrate" : "reference"}};
  ThresholdTable table;
  if (cfg_.threshold_mode == ThresholdMode::Reference) {
    table = ThresholdTable::reference_preset();
  } else {
    const auto val = read_records(path("splits/val.jsonl"));
    const auto cal = calibrate_thresholds(model.ensemble, model.features, val, cfg_.target_precision, cfg_.grid_step);
    table = cal.table;
    report["target_precision"] = cfg_.target_precision;
    report["grid_step"] = cfg_.grid_step;
    nlohmann::json unattained = nlohmann::json::array();
    for (Category c : cal.unattained) unattained.push_back(std::string(code_name(c)));
    report["unattained"] = unattained;
    nlohmann::json precision = nlohmann::json::object(), accepted = nlohmann::json::object();
    for (Category c : kAllCategories) {
      precision[std::string(code_name(c))] = cal.precision[index_of(c)];
      accepted[std::string(code_name(c))] = cal.accepted[index_of(c)];
    }
    report["precision"] = precision;
    report["accepted"] = accepted;
    if (!cal.unattained.empty()) {
      log_ << "[calibrate] warning: target precision not reached for " << cal.unattained.size()
           << " categories; their threshold is 1.0\n";
    }
  }
  write_json(path("silver/thresholds.json"), to_json(table));
  write_json(path("silver/calibration.json"), report);
  log_ << "[calibrate] thresholds written\n";
  record("calibrate", key);
}

void Pipeline::silver_label() {
  const auto key = stage_key("silver-label");
  if (up_to_date("silver-label", key, {"silver/silver.jsonl", "silver/histogram.json"})) return;
  const auto model = load_silver_model(path("silver/model.json"));
  const auto table = load_thresholds(path("silver/thresholds.json"));
  std::unordered_set<std::string> gold_ids;
  for (const char* split : {"splits/train.jsonl", "splits/val.jsonl", "splits/test.jsonl"}) {
    for (const auto& r : read_records(path(split))) gold_ids.insert(r.record.id);
  }
  const auto pool = read_jsonl_file(cfg_.pool_path).records;
  const auto set = build_silver_set(pool, model.ensemble, model.features, table, gold_ids);
  write_records(path("silver/silver.jsonl"), set.records);
  write_json(path("silver/histogram.json"), {{"accepted", set.records.size()},
                                             {"excluded", set.excluded},
                                             {"below_threshold", set.below_threshold},
                                             {"histogram", histogram_json(set.histogram)}});
  log_ << "[silver-label] accepted " << set.records.size() << " of " << pool.size() << " pool records ("
       << set.excluded << " excluded as gold, " << set.below_threshold << " below threshold)\n";
  record("silver-label", key);
}

void Pipeline::train() {
  const auto key = stage_key("train");
  std::vector<std::string> outputs;
  for (const auto& r : regime_names(cfg_)) {
    outputs.push_back(regime_file(r));
    outputs.push_back("history/" + r + ".csv");
  }
  if (up_to_date("train", key, outputs)) return;

  auto records = read_records(path("splits/train.jsonl"));
  const auto silver = read_records(path("silver/silver.jsonl"));
  records.insert(records.end(), silver.begin(), silver.end());
  const auto data = featurize_all(records, cfg_.features);
  const auto val = featurize_all(read_records(path("splits/val.jsonl")), cfg_.features);
  const auto base = make_classifier(cfg_.features, cfg_.hidden, derive_seed(cfg_.seed, "classifier"));

  const auto save = [&](const std::string& name, const TrainResult& r) {
    write_json(path(regime_file(name)), to_json(r.best));
    write_text(path("history/" + name + ".csv"), r.history.to_csv());
    const auto& best = r.history.epochs[r.history.best_epoch - 1];
    log_ << "[train] " << name << ": best epoch " << r.history.best_epoch << ", val loss " << best.val_loss
         << ", val macro-F1 " << best.val_macro_f1 << "\n";
  };

  TrainConfig ce = cfg_.train;
  ce.loss = LossKind::CrossEntropy;
  const auto ce_result = fanal::train(base, std::nullopt, data, val, ce);
  save("ce", ce_result);

  TrainConfig orpo = cfg_.train;
  orpo.loss = LossKind::Orpo;
  save("orpo", fanal::train(base, std::nullopt, data, val, orpo));

  // Adapters start from the cross-entropy model, which stays frozen.
  const auto& frozen = ce_result.best.model;
  for (auto rank : cfg_.lora_ranks) {
    const auto adapter = lora_wrap(frozen, rank, derive_seed(cfg_.seed, "lora"));
    save("lora-r" + std::to_string(rank), fanal::train(frozen, adapter, data, val, cfg_.lora));
  }
  record("train", key);
}

void Pipeline::eval() {
  const auto key = stage_key("eval");
  if (up_to_date("eval", key, {"reports/metrics.txt", "reports/metrics.json", "reports/margin.json"})) return;

  const auto test = read_records(path("splits/test.jsonl"));
  const DecisionPolicy policy = cfg_.eval_policy == EvalPolicy::Thresholded
                                    ? DecisionPolicy::thresholded(load_thresholds(path("silver/thresholds.json")))
                                    : DecisionPolicy::argmax();
  const auto silver = load_silver_model(path("silver/model.json"));
  const auto xs = featurize_all(test, cfg_.features);

  std::vector<NamedReport> reports;
  const auto score = [&](const std::string& name, auto&& distribution) {
    std::vector<std::pair<Category, Category>> pairs;
    for (const auto& [x, y] : xs) pairs.emplace_back(y, decide(distribution(x), policy));
    reports.push_back({name, metrics(confusion(pairs))});
  };
  score("gbt", [&](const FeatureVector& x) { return gbt_predict_proba(silver.ensemble, x); });

  std::map<std::string, std::vector<ScoredPrediction>> scored;
  for (const auto& name : regime_names(cfg_)) {
    const auto p = path(regime_file(name));
    if (!fs::exists(p)) throw DataError("missing artifact " + p + " (run train first)");
    const auto bundle = classifier_bundle_from_json(read_json(p));
    const LoraAdapter* adapter = bundle.adapter ? &*bundle.adapter : nullptr;
    score(name, [&](const FeatureVector& x) { return forward(bundle.model, adapter, x); });
    auto& sp = scored[name];
    for (const auto& [x, y] : xs) {
      const auto [label, conf] = confidence(bundle.model, adapter, x);
      sp.push_back({label == y, conf});
    }
  }

  nlohmann::json models = nlohmann::json::object();
  for (const auto& r : reports) models[r.model] = to_json(r.report);
  write_json(path("reports/metrics.json"),
             {{"policy", cfg_.eval_policy == EvalPolicy::Argmax ? "argmax" : "thresholded"},
              {"n", test.size()},
              {"models", models}});
  write_text(path("reports/metrics.txt"), render_table(reports));

  auto margin = to_json(confidence_margin_report(scored.at("orpo"), scored.at("ce")));
  margin["a"] = "orpo";
  margin["b"] = "ce";
  write_json(path("reports/margin.json"), margin);
  for (const auto& r : reports) {
    log_ << "[eval] " << r.model << ": accuracy " << r.report.micro_accuracy << ", macro-F1 " << r.report.macro_f1
         << "\n";
  }
  record("eval", key);
}

void Pipeline::report() {
  const auto key = stage_key("report");
  if (up_to_date("report", key, {"reports/summary.md", "reports/cost.json"})) return;
  for (const char* p : {"reports/metrics.json", "reports/margin.json", "silver/histogram.json"}) {
    if (!fs::exists(path(p))) throw DataError("missing artifact " + path(p) + " (run eval first)");
  }
  const auto metrics_j = read_json(path("reports/metrics.json"));
  const auto margin = read_json(path("reports/margin.json"));
  const auto hist = read_json(path("silver/histogram.json"));

  nlohmann::json costs = nlohmann::json::array();
  for (const auto& preset : cost_presets()) costs.push_back(to_json(cost_estimate(10000, preset)));
  write_json(path("reports/cost.json"), {{"articles", 10000}, {"estimates", costs}});

  std::ostringstream md;
  md << std::setprecision(4);
  md << "# Run summary\n\nseed " << cfg_.seed << ", " << metrics_j.at("n").get<std::size_t>()
     << " gold test records, decision policy " << metrics_j.at("policy").get<std::string>() << ".\n\n";
  md << "Silver set: " << hist.at("accepted").get<std::size_t>() << " accepted, "
     << hist.at("below_threshold").get<std::size_t>() << " below threshold, " << hist.at("excluded").get<std::size_t>()
     << " excluded as gold.\n\n";
  md << "| model | accuracy | macro P | macro R | macro F1 |\n|---|---|---|---|---|\n";
  for (const auto& [name, r] : metrics_j.at("models").items()) {
    const auto rep = metrics_report_from_json(r);
    md << "| " << name << " | " << rep.micro_accuracy << " | " << rep.macro_precision << " | " << rep.macro_recall
       << " | " << rep.macro_f1 << " |\n";
  }
  md << "\nMean confidence on correct predictions: orpo " << margin.at("mean_correct_a").get<double>() << ", ce "
     << margin.at("mean_correct_b").get<double>() << ".\n\n";
  md << "| cost preset | hours per 10k | cost per 10k |\n|---|---|---|\n";
  for (const auto& c : costs) {
    md << "| " << c.at("mode").get<std::string>() << " | " << c.at("inference_hours").get<double>() << " | "
       << c.at("total_cost").get<double>() << " |\n";
  }
  write_text(path("reports/summary.md"), md.str());
  log_ << "[report] wrote reports/summary.md\n";
  record("report", key);
}

void Pipeline::write_manifest() {
  nlohmann::json artifacts = nlohmann::json::object();
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(cfg_.out_dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), cfg_.out_dir).generic_string();
    if (rel == "manifest.json" || rel.rfind("bench/", 0) == 0) continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) artifacts[f] = sha256_file(path(f));
  nlohmann::json stages = nlohmann::json::object();
  for (const char* s : kStages) stages[s] = stage_key(s);
  const nlohmann::json manifest = {{"format", "fanal.manifest"},
                                   {"version", 1},
                                   {"config", fs::path(cfg_.config_path).filename().string()},
                                   {"config_sha256", cfg_.config_sha256},
                                   {"effective_config_sha256", sha256_hex(cfg_.raw.canonical())},
                                   {"seed", cfg_.seed},
                                   {"regimes", regime_names(cfg_)},
                                   {"stages", stages},
                                   {"artifacts", artifacts},
                                   {"created_at", now_utc()}};
  write_json(path("manifest.json"), manifest);
}

void Pipeline::run_all() {
  ingest();
  train_silver();
  calibrate();
  silver_label();
  train();
  eval();
  report();
  write_manifest();
}

BenchRun Pipeline::bench() {
  const auto& b = cfg_.bench;
  const auto test = read_records(path("splits/test.jsonl"));
  const auto tmpl = PromptTemplate::standard(b.variant);
  const std::string stem = "bench/" + std::string(to_string(b.variant)) + "-" + b.client;

  BenchRun run;
  if (b.client == "replay") {
    const std::string source =
        b.replay_path.empty() ? path("bench/" + std::string(to_string(b.variant)) + "-stub.transcript.jsonl")
                              : b.replay_path;
    if (!fs::exists(source)) throw DataError("replay transcript not found: " + source);
    run = replay_benchmark(read_transcript(source), tmpl, test, b.options);
  } else {
    std::unique_ptr<ChatClient> client;
    if (b.client == "http") {
      client = std::make_unique<HttpChatClient>(b.http);
    } else {
      client = std::make_unique<KeywordStubClient>(cfg_.seed, b.stub_noise);
    }
    try {
      run = run_benchmark(*client, tmpl, test, b.options);
    } catch (const BenchAborted& ex) {
      write_transcript(path(stem + ".partial.jsonl"), ex.partial.transcript());
      log_ << "[bench] client unavailable; " << ex.partial.entries.size() << " entries saved to " << stem
           << ".partial.jsonl\n";
      throw;
    }
  }
  fs::create_directories(path("bench"));
  write_transcript(path(stem + ".transcript.jsonl"), run.transcript());
  write_json(path(stem + ".metrics.json"), to_json(run));
  const std::vector<NamedReport> table = {{b.client + "-" + std::string(to_string(b.variant)), run.report}};
  write_text(path(stem + ".metrics.txt"), render_table(table));
  log_ << "[bench] " << to_string(b.variant) << " via " << run.client_id << ": accuracy " << run.report.micro_accuracy
       << ", macro precision " << run.report.macro_precision << ", unparseable " << run.unparseable << "/"
       << run.entries.size() << "\n";
  return run;
}

nlohmann::json strip_volatile(nlohmann::json j) {
  if (j.is_object()) {
    j.erase("created_at");
    for (auto& [k, v] : j.items()) v = strip_volatile(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_volatile(v);
  }
  return j;
}

}  // namespace fanal
