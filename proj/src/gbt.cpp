// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fanal/error.hpp"
#include "fanal/random.hpp"

namespace fanal {
namespace {

constexpr double kMinHessian = 1e-16;
constexpr double kMinGain = 1e-6;

struct ColumnEntry {
  std::uint32_t row;
  double value;
};

// Nonzero entries per feature, sorted by decreasing value (row breaks ties).
struct ColumnIndex {
  std::vector<std::uint32_t> features;
  std::vector<std::vector<ColumnEntry>> columns;
};

ColumnIndex build_columns(std::span<const LabeledVector> data) {
  std::vector<std::pair<std::uint32_t, ColumnEntry>> all;
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (const auto& [f, v] : data[r].first.entries) {
      if (v < 0.0 || !std::isfinite(v)) throw DataError("gbt_fit: feature values must be finite and non-negative");
      if (v == 0.0) continue;
      all.push_back({f, {static_cast<std::uint32_t>(r), v}});
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.second.value != b.second.value) return a.second.value > b.second.value;
    return a.second.row < b.second.row;
  });
  ColumnIndex idx;
  for (const auto& [f, e] : all) {
    if (idx.features.empty() || idx.features.back() != f) {
      idx.features.push_back(f);
      idx.columns.emplace_back();
    }
    idx.columns.back().push_back(e);
  }
  return idx;
}

double leaf_weight(double g, double h, double lambda) { return -g / (h + lambda); }

double score_term(double g, double h, double lambda) { return g * g / (h + lambda); }

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

struct SplitCandidate {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
};

struct Accumulator {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
  double last_value = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const ColumnIndex& columns, std::span<const LabeledVector> data, const GbtParams& params)
      : columns_(columns), data_(data), params_(params) {}

  // Returns the tree and writes each row's (eta-scaled) output into `out`.
  RegressionTree build(const std::vector<double>& g, const std::vector<double>& h,
                       const std::vector<std::size_t>& feature_subset, std::vector<double>& out) {
    const std::size_t n = data_.size();
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::vector<NodeStats> stats(1);
    for (std::size_t r = 0; r < n; ++r) {
      stats[0].g += g[r];
      stats[0].h += h[r];
    }
    stats[0].count = n;
    node_of_.assign(n, 0);

    std::vector<std::int32_t> level = {0};
    for (int depth = 0; depth < params_.max_depth && !level.empty(); ++depth) {
      std::vector<SplitCandidate> best(tree.nodes.size());
      find_splits(g, h, feature_subset, stats, level, best);

      std::vector<std::int32_t> next;
      for (std::int32_t node : level) {
        const auto& cand = best[static_cast<std::size_t>(node)];
        if (cand.feature < 0) continue;
        const auto left = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        stats.emplace_back();
        stats.emplace_back();
        auto& nd = tree.nodes[static_cast<std::size_t>(node)];
        nd.feature = cand.feature;
        nd.threshold = cand.threshold;
        nd.left = left;
        nd.right = left + 1;
        next.push_back(left);
        next.push_back(left + 1);
      }
      if (next.empty()) break;
      for (std::size_t r = 0; r < n; ++r) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(node_of_[r])];
        if (nd.feature < 0 || nd.left < 0) continue;
        const double x = data_[r].first.value(static_cast<std::uint32_t>(nd.feature));
        const std::int32_t child = x < nd.threshold ? nd.left : nd.right;
        node_of_[r] = child;
        auto& s = stats[static_cast<std::size_t>(child)];
        s.g += g[r];
        s.h += h[r];
        ++s.count;
      }
      level = std::move(next);
    }

    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      auto& nd = tree.nodes[i];
      if (nd.feature < 0) nd.leaf = params_.eta * leaf_weight(stats[i].g, stats[i].h, params_.lambda);
    }
    out.resize(n);
    for (std::size_t r = 0; r < n; ++r) out[r] = tree.nodes[static_cast<std::size_t>(node_of_[r])].leaf;
    return tree;
  }

 private:
  void consider(const NodeStats& parent, double gr, double hr, std::size_t count_right, std::int32_t feature,
                double threshold, SplitCandidate& best) const {
    const double gl = parent.g - gr;
    const double hl = parent.h - hr;
    if (count_right == 0 || count_right == parent.count) return;
    if (hl < params_.min_child_weight || hr < params_.min_child_weight) return;
    const double lambda = params_.lambda;
    const double gain = 0.5 * (score_term(gl, hl, lambda) + score_term(gr, hr, lambda) -
                               score_term(parent.g, parent.h, lambda)) -
                        params_.gamma;
    if (gain > kMinGain && gain > best.gain) {
      best.gain = gain;
      best.feature = feature;
      best.threshold = threshold;
    }
  }

  void find_splits(const std::vector<double>& g, const std::vector<double>& h,
                   const std::vector<std::size_t>& feature_subset, const std::vector<NodeStats>& stats,
                   const std::vector<std::int32_t>& level, std::vector<SplitCandidate>& best) {
    std::vector<char> active(stats.size(), 0);
    for (std::int32_t node : level) active[static_cast<std::size_t>(node)] = 1;
    std::vector<Accumulator> acc(stats.size());
    std::vector<std::int32_t> touched;

    for (std::size_t fi : feature_subset) {
      const auto feature = static_cast<std::int32_t>(columns_.features[fi]);
      for (const ColumnEntry& e : columns_.columns[fi]) {
        const std::int32_t node = node_of_[e.row];
        if (!active[static_cast<std::size_t>(node)]) continue;
        auto& a = acc[static_cast<std::size_t>(node)];
        if (a.count == 0) {
          touched.push_back(node);
        } else if (e.value < a.last_value) {
          // Right side holds every value >= last_value seen so far.
          double t = e.value + 0.5 * (a.last_value - e.value);
          if (!(t > e.value)) t = a.last_value;
          consider(stats[static_cast<std::size_t>(node)], a.g, a.h, a.count, feature, t,
                   best[static_cast<std::size_t>(node)]);
        }
        a.g += g[e.row];
        a.h += h[e.row];
        ++a.count;
        a.last_value = e.value;
      }
      // Split between the implicit zeros and the smallest nonzero value.
      for (std::int32_t node : touched) {
        auto& a = acc[static_cast<std::size_t>(node)];
        consider(stats[static_cast<std::size_t>(node)], a.g, a.h, a.count, feature, 0.5 * a.last_value,
                 best[static_cast<std::size_t>(node)]);
        a = Accumulator{};
      }
      touched.clear();
    }
  }

  const ColumnIndex& columns_;
  std::span<const LabeledVector> data_;
  const GbtParams& params_;
  std::vector<std::int32_t> node_of_;
};

double log_loss_from_scores(const std::vector<Logits>& scores, std::span<const LabeledVector> data) {
  double total = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) total += cross_entropy_logits(scores[r], data[r].second);
  return total / static_cast<double>(data.size());
}

}  // namespace

void validate(const GbtParams& p) {
  if (!(p.lambda >= 0.0)) throw ConfigError("gbt.lambda must be >= 0");
  if (!(p.gamma >= 0.0)) throw ConfigError("gbt.gamma must be >= 0");
  if (p.max_depth < 1) throw ConfigError("gbt.max_depth must be >= 1");
  if (!(p.eta > 0.0 && p.eta <= 1.0)) throw ConfigError("gbt.eta must be in (0, 1]");
  if (p.n_rounds < 0) throw ConfigError("gbt.rounds must be >= 0");
  if (!(p.min_child_weight >= 0.0)) throw ConfigError("gbt.min_child_weight must be >= 0");
  if (!(p.colsample > 0.0 && p.colsample <= 1.0)) throw ConfigError("gbt.colsample must be in (0, 1]");
}

double RegressionTree::predict(const FeatureVector& x) const noexcept {
  if (nodes.empty()) return 0.0;
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const double v = x.value(static_cast<std::uint32_t>(nodes[i].feature));
    i = static_cast<std::size_t>(v < nodes[i].threshold ? nodes[i].left : nodes[i].right);
  }
  return nodes[i].leaf;
}

int RegressionTree::depth() const noexcept {
  if (nodes.empty()) return 0;
  int best = 0;
  std::vector<std::pair<std::size_t, int>> stack = {{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[i].feature >= 0) {
      stack.push_back({static_cast<std::size_t>(nodes[i].left), d + 1});
      stack.push_back({static_cast<std::size_t>(nodes[i].right), d + 1});
    }
  }
  return best;
}

Logits GbtEnsemble::scores(const FeatureVector& x) const noexcept {
  Logits s{};
  for (const auto& round : rounds) {
    for (std::size_t k = 0; k < kNumCategories; ++k) s[k] += round[k].predict(x);
  }
  return s;
}

GbtEnsemble gbt_fit(std::span<const LabeledVector> train, const GbtParams& params) {
  validate(params);
  if (train.empty()) throw DataError("gbt_fit: empty training set");
  std::array<std::size_t, kNumCategories> support{};
  for (const auto& [x, y] : train) ++support[index_of(y)];
  std::string missing;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    if (support[k] == 0) missing += (missing.empty() ? "" : ", ") + std::string(code_name(category_at(k)));
  }
  if (!missing.empty()) throw DataError("gbt_fit: missing classes: " + missing);

  const ColumnIndex columns = build_columns(train);
  const std::size_t n = train.size();
  Rng rng(params.seed);

  GbtEnsemble model;
  model.params = params;
  std::vector<Logits> scores(n, Logits{});
  model.train_log_loss.push_back(log_loss_from_scores(scores, train));

  std::vector<double> g(n), h(n), out;
  std::vector<std::size_t> all_features(columns.features.size());
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});
  TreeBuilder builder(columns, train, params);

  for (int round = 0; round < params.n_rounds; ++round) {
    std::vector<ProbDist> probs;
    probs.reserve(n);
    for (const auto& s : scores) probs.push_back(softmax(s));

    std::array<RegressionTree, kNumCategories> trees;
    std::vector<Logits> delta(n, Logits{});
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      for (std::size_t r = 0; r < n; ++r) {
        const double p = probs[r].at(k);
        g[r] = p - (index_of(train[r].second) == k ? 1.0 : 0.0);
        h[r] = std::max(p * (1.0 - p), kMinHessian);
      }
      std::vector<std::size_t> subset = all_features;
      if (params.colsample < 1.0 && !subset.empty()) {
        rng.shuffle(std::span<std::size_t>(subset));
        const auto keep = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(params.colsample * static_cast<double>(subset.size()))));
        subset.resize(keep);
        std::sort(subset.begin(), subset.end());
      }
      trees[k] = builder.build(g, h, subset, out);
      for (std::size_t r = 0; r < n; ++r) delta[r][k] = out[r];
    }
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < kNumCategories; ++k) scores[r][k] += delta[r][k];
    }
    model.rounds.push_back(std::move(trees));
    model.train_log_loss.push_back(log_loss_from_scores(scores, train));
  }
  return model;
}

ProbDist gbt_predict_proba(const GbtEnsemble& model, const FeatureVector& x) { return softmax(model.scores(x)); }

double multiclass_log_loss(const GbtEnsemble& model, std::span<const LabeledVector> data) {
  std::vector<Logits> scores;
  scores.reserve(data.size());
  for (const auto& [x, y] : data) scores.push_back(model.scores(x));
  return log_loss_from_scores(scores, data);
}

nlohmann::json to_json(const GbtParams& p) {
  return {{"objective", "multi:softprob"},
          {"booster", "gbtree"},
          {"lambda", p.lambda},
          {"gamma", p.gamma},
          {"max_depth", p.max_depth},
          {"eta", p.eta},
          {"n_rounds", p.n_rounds},
          {"min_child_weight", p.min_child_weight},
          {"colsample", p.colsample},
          {"seed", p.seed}};
}

GbtParams gbt_params_from_json(const nlohmann::json& j) {
  GbtParams p;
  p.lambda = j.at("lambda").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.eta = j.at("eta").get<double>();
  p.n_rounds = j.at("n_rounds").get<int>();
  p.min_child_weight = j.at("min_child_weight").get<double>();
  p.colsample = j.at("colsample").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  validate(p);
  return p;
}

nlohmann::json to_json(const GbtEnsemble& model) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& round : model.rounds) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& tree : round) {
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto& nd : tree.nodes) {
        if (nd.feature < 0) {
          nodes.push_back({{"leaf", nd.leaf}});
        } else {
          nodes.push_back({{"feature", nd.feature}, {"threshold", nd.threshold}, {"left", nd.left}, {"right", nd.right}});
        }
      }
      per_class.push_back(std::move(nodes));
    }
    rounds.push_back(std::move(per_class));
  }
  return {{"params", to_json(model.params)}, {"rounds", std::move(rounds)}, {"train_log_loss", model.train_log_loss}};
}

GbtEnsemble gbt_from_json(const nlohmann::json& j) {
  GbtEnsemble model;
  model.params = gbt_params_from_json(j.at("params"));
  model.train_log_loss = j.value("train_log_loss", std::vector<double>{});
  for (const auto& round : j.at("rounds")) {
    if (round.size() != kNumCategories) throw FormatError("gbt model: round must hold 12 trees");
    std::array<RegressionTree, kNumCategories> trees;
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      for (const auto& nd : round[k]) {
        TreeNode node;
        if (nd.contains("leaf")) {
          node.leaf = nd.at("leaf").get<double>();
          if (!std::isfinite(node.leaf)) throw FormatError("gbt model: non-finite leaf weight");
        } else {
          node.feature = nd.at("feature").get<std::int32_t>();
          node.threshold = nd.at("threshold").get<double>();
          node.left = nd.at("left").get<std::int32_t>();
          node.right = nd.at("right").get<std::int32_t>();
        }
        trees[k].nodes.push_back(node);
      }
      const auto size = static_cast<std::int32_t>(trees[k].nodes.size());
      for (const auto& nd : trees[k].nodes) {
        if (nd.feature >= 0 && (nd.left <= 0 || nd.right <= 0 || nd.left >= size || nd.right >= size)) {
          throw FormatError("gbt model: child index out of range");
        }
      }
    }
    model.rounds.push_back(std::move(trees));
  }
  return model;
}

}  // namespace fanal
