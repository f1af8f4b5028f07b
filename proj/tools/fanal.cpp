// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fanal/classifier.hpp"
#include "fanal/error.hpp"
#include "fanal/fixtures.hpp"
#include "fanal/pipeline.hpp"
#include "fanal/silver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool resume = false;
};

fanal::Pipeline make_pipeline(const Globals& g) {
  if (g.config.empty()) throw fanal::ConfigError("--config is required for this command");
  fanal::ConfigOverrides o;
  o.seed = g.seed;
  if (!g.out.empty()) o.out_dir = g.out;
  return fanal::Pipeline(fanal::load_pipeline_config(g.config, o), g.resume, std::cerr);
}

struct ClassifyOptions {
  std::string model;
  std::string input = "-";
  std::string policy = "argmax";
  std::string thresholds;
  bool strict = false;
};

// One JSON record per input line in, one labeled record per line out.
int classify(const ClassifyOptions& opt) {
  using namespace fanal;
  std::ifstream model_in(opt.model);
  if (!model_in) throw DataError("cannot open model " + opt.model);
  const auto mj = nlohmann::json::parse(model_in, nullptr, false);
  if (mj.is_discarded()) throw DataError(opt.model + ": malformed JSON");

  std::optional<ClassifierBundle> bundle;
  std::optional<SilverModel> silver;
  if (mj.value("format", std::string{}) == "fanal.classifier") {
    bundle = classifier_bundle_from_json(mj);
  } else {
    silver = silver_model_from_json(mj);
  }
  const FeatConfig features = bundle ? bundle->model.features : silver->features;

  DecisionPolicy policy = DecisionPolicy::argmax();
  if (opt.policy == "thresholded") {
    if (!opt.thresholds.empty()) {
      std::ifstream tin(opt.thresholds);
      if (!tin) throw DataError("cannot open thresholds " + opt.thresholds);
      policy = DecisionPolicy::thresholded(threshold_table_from_json(nlohmann::json::parse(tin)));
    } else if (silver && silver->thresholds) {
      policy = DecisionPolicy::thresholded(*silver->thresholds);
    } else {
      throw ConfigError("--policy thresholded needs --thresholds");
    }
  } else if (opt.policy != "argmax") {
    throw ConfigError("--policy must be argmax or thresholded");
  }

  std::ifstream file;
  if (opt.input != "-") {
    file.open(opt.input);
    if (!file) throw DataError("cannot open input " + opt.input);
  }
  std::istream& in = opt.input == "-" ? std::cin : file;
  std::string line;
  std::size_t skipped = 0;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    NewsRecord rec;
    try {
      const auto j = nlohmann::json::parse(line);
      rec = news_from_json(j, n);
    } catch (const std::exception& e) {
      if (opt.strict) throw DataError("input line " + std::to_string(n) + ": " + e.what());
      std::cerr << "fanal: warning: skipping input line " << n << ": " << e.what() << "\n";
      ++skipped;
      continue;
    }
    const auto x = featurize(rec.text(), features);
    const ProbDist dist =
        bundle ? forward(bundle->model, bundle->adapter ? &*bundle->adapter : nullptr, x)
               : gbt_predict_proba(silver->ensemble, x);
    const Category label = decide(dist, policy);
    const double conf = std::max(dist[label], 1e-300);
    std::cout << to_json(LabeledRecord{rec, label, Provenance::predicted(conf)}).dump() << '\n';
  }
  if (skipped) std::cerr << "fanal: " << skipped << " input lines skipped\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fanal: financial news event classification pipeline"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config, "Pipeline config file");
  auto* seed_opt = app.add_option("--seed", seed_value, "Override the global seed");
  app.add_option("--out", g.out, "Override the artifact directory");
  app.add_flag("--resume", g.resume, "Skip stages whose inputs have not changed");

  struct Stage {
    const char* name;
    const char* help;
    void (fanal::Pipeline::*run)();
  };
  const Stage stages[] = {
      {"ingest", "Validate inputs and write the gold splits", &fanal::Pipeline::ingest},
      {"train-silver", "Train the gradient-boosted silver labeler", &fanal::Pipeline::train_silver},
      {"calibrate", "Calibrate per-category thresholds", &fanal::Pipeline::calibrate},
      {"silver-label", "Label the pool and keep confident predictions", &fanal::Pipeline::silver_label},
      {"train", "Train the CE, ORPO and adapter classifiers", &fanal::Pipeline::train},
      {"eval", "Score every model on the gold test split", &fanal::Pipeline::eval},
      {"report", "Summarize metrics, margins and cost", &fanal::Pipeline::report},
      {"pipeline", "Run every stage and write the manifest", &fanal::Pipeline::run_all},
  };
  std::function<int()> action;
  for (const auto& s : stages) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->fallthrough();
    sub->callback([&, run = s.run] {
      action = [&, run] {
        auto p = make_pipeline(g);
        (p.*run)();
        return kExitOk;
      };
    });
  }

  std::string bench_template, bench_client, bench_replay;
  auto* bench = app.add_subcommand("bench", "Benchmark a chat client on the gold test split");
  bench->fallthrough();
  bench->add_option("--template", bench_template, "T1, T2 or T3");
  bench->add_option("--client", bench_client, "stub, replay or http");
  bench->add_option("--replay", bench_replay, "Transcript to replay");
  bench->callback([&] {
    action = [&] {
      if (g.config.empty()) throw fanal::ConfigError("--config is required for this command");
      fanal::ConfigOverrides o;
      o.seed = g.seed;
      if (!g.out.empty()) o.out_dir = g.out;
      auto cfg = fanal::load_pipeline_config(g.config, o);
      if (!bench_template.empty()) cfg.bench.variant = fanal::template_variant_from_string(bench_template);
      if (!bench_client.empty()) {
        if (bench_client != "stub" && bench_client != "replay" && bench_client != "http") {
          throw fanal::ConfigError("--client must be stub, replay or http");
        }
        cfg.bench.client = bench_client;
      }
      if (!bench_replay.empty()) cfg.bench.replay_path = bench_replay;
      fanal::Pipeline p(std::move(cfg), g.resume, std::cerr);
      p.bench();
      return kExitOk;
    };
  });

  ClassifyOptions copt;
  auto* cls = app.add_subcommand("classify", "Label a JSONL stream with a trained model");
  cls->add_option("--model", copt.model, "Classifier bundle or silver model JSON")->required();
  cls->add_option("--input", copt.input, "Input JSONL ('-' for stdin)");
  cls->add_option("--policy", copt.policy, "argmax or thresholded");
  cls->add_option("--thresholds", copt.thresholds, "Threshold table JSON");
  cls->add_flag("--strict", copt.strict, "Fail on the first unparseable line");
  cls->callback([&] { action = [&] { return classify(copt); }; });

  std::string kind;
  std::size_t per_class = 200, count = 400;
  auto* gen = app.add_subcommand("generate", "Write a deterministic fixture corpus");
  gen->fallthrough();
  gen->add_option("kind", kind, "synthetic, imbalanced or relevance")->required();
  gen->add_option("--per-class", per_class, "Records per category (synthetic)");
  gen->add_option("--count", count, "Number of sentences (relevance)");
  gen->callback([&] {
    action = [&] {
      if (g.out.empty()) throw fanal::ConfigError("--out is required for generate");
      const auto seed = g.seed.value_or(42);
      if (kind == "synthetic") {
        fanal::write_synthetic_fixture(g.out, per_class, seed);
      } else if (kind == "imbalanced") {
        fanal::write_imbalanced_fixture(g.out, seed);
      } else if (kind == "relevance") {
        fanal::write_relevance_fixture(g.out, count, seed);
      } else {
        throw fanal::ConfigError("unknown fixture kind '" + kind + "'");
      }
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    return action ? action() : kExitOk;
  } catch (const fanal::ConfigError& e) {
    std::cerr << "fanal: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fanal::DivergenceError& e) {
    std::cerr << "fanal: training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const fanal::DataError& e) {
    std::cerr << "fanal: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fanal::FormatError& e) {
    std::cerr << "fanal: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fanal::BenchAborted& e) {
    std::cerr << "fanal: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "fanal: error: " << e.what() << "\n";
    return kExitFailure;
  }
}
