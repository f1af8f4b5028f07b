// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/train.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "fanal/error.hpp"
#include "fanal/metrics.hpp"
#include "fanal/random.hpp"

namespace fanal {
namespace {

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t t = 0;
};

// Parameter blocks paired with their gradients, in a fixed order.
struct Block {
  std::span<double> param;
  std::span<const double> grad;
};

std::vector<Block> trainable_blocks(SoftmaxClassifier& model, LoraAdapter* adapter, const Gradients& g,
                                    bool train_base) {
  std::vector<Block> blocks;
  if (train_base) {
    if (model.hidden > 0) {
      blocks.push_back({model.V.data, g.V.data});
      blocks.push_back({model.c, g.c});
    }
    blocks.push_back({model.W0.data, g.W0.data});
    blocks.push_back({model.bias, g.bias});
  }
  if (adapter) {
    blocks.push_back({adapter->B.data, g.B.data});
    blocks.push_back({adapter->A.data, g.A.data});
  }
  return blocks;
}

void adamw_step(std::vector<Block>& blocks, AdamState& st, double lr, const AdamWConfig& cfg) {
  if (st.m.empty()) {
    for (const auto& b : blocks) {
      st.m.emplace_back(b.param.size(), 0.0);
      st.v.emplace_back(b.param.size(), 0.0);
    }
  }
  ++st.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  const double step = lr / bc1;
  const double bc2_sqrt = std::sqrt(bc2);
  const double decay = 1.0 - lr * cfg.weight_decay;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto p = blocks[b].param;
    auto g = blocks[b].grad;
    auto& m = st.m[b];
    auto& v = st.v[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      p[i] = p[i] * decay - step * m[i] / (std::sqrt(v[i]) / bc2_sqrt + cfg.eps);
    }
  }
}

void check_classes(std::span<const LabeledVector> data) {
  std::array<std::size_t, kNumCategories> support{};
  for (const auto& [x, y] : data) ++support[index_of(y)];
  std::string missing;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    if (support[k] == 0) missing += (missing.empty() ? "" : ", ") + std::string(code_name(category_at(k)));
  }
  if (!missing.empty()) throw DataError("train: missing classes: " + missing);
}

double macro_f1(const SoftmaxClassifier& model, const LoraAdapter* adapter, std::span<const LabeledVector> data) {
  ConfusionMatrix cm;
  for (const auto& [x, y] : data) cm.add(y, forward(model, adapter, x).argmax());
  return metrics(cm).macro_f1;
}

}  // namespace

std::string_view to_string(LossKind k) noexcept {
  return k == LossKind::Orpo ? "orpo" : "cross-entropy";
}

LossKind loss_kind_from_string(std::string_view s) {
  if (s == "cross-entropy" || s == "ce") return LossKind::CrossEntropy;
  if (s == "orpo") return LossKind::Orpo;
  throw ConfigError("unknown loss '" + std::string(s) + "' (expected cross-entropy or orpo)");
}

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) throw ConfigError("train.lr must be > 0");
  if (c.batch_size == 0) throw ConfigError("train.batch_size must be > 0");
  if (c.epochs == 0) throw ConfigError("train.epochs must be > 0");
  if (!(c.orpo.lambda >= 0.0)) throw ConfigError("orpo.lambda must be >= 0");
  if (!(c.adamw.beta1 >= 0.0 && c.adamw.beta1 < 1.0 && c.adamw.beta2 >= 0.0 && c.adamw.beta2 < 1.0)) {
    throw ConfigError("adamw betas must be in [0, 1)");
  }
  if (!(c.adamw.eps > 0.0) || !(c.adamw.weight_decay >= 0.0)) throw ConfigError("adamw eps/weight_decay out of range");
}

std::string TrainHistory::to_csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,val_macro_f1\n" << std::setprecision(17);
  for (const auto& e : epochs) {
    out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_macro_f1 << '\n';
  }
  return out.str();
}

TrainHistory TrainHistory::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_loss,val_loss,val_macro_f1") {
    throw FormatError("train history: bad CSV header");
  }
  TrainHistory h;
  double best = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    EpochRecord e;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> e.epoch >> c1 >> e.train_loss >> c2 >> e.val_loss >> c3 >> e.val_macro_f1) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      throw FormatError("train history: bad CSV row '" + line + "'");
    }
    if (h.epochs.empty() || e.val_loss < best) {
      best = e.val_loss;
      h.best_epoch = e.epoch;
    }
    h.epochs.push_back(e);
  }
  return h;
}

Gradients Gradients::like(const SoftmaxClassifier& model, const LoraAdapter* adapter) {
  Gradients g;
  g.V = Matrix(model.V.rows, model.V.cols);
  g.c.assign(model.c.size(), 0.0);
  g.W0 = Matrix(model.W0.rows, model.W0.cols);
  if (adapter) {
    g.B = Matrix(adapter->B.rows, adapter->B.cols);
    g.A = Matrix(adapter->A.rows, adapter->A.cols);
  }
  return g;
}

void Gradients::zero() noexcept {
  std::fill(V.data.begin(), V.data.end(), 0.0);
  std::fill(c.begin(), c.end(), 0.0);
  std::fill(W0.data.begin(), W0.data.end(), 0.0);
  bias.fill(0.0);
  std::fill(B.data.begin(), B.data.end(), 0.0);
  std::fill(A.data.begin(), A.data.end(), 0.0);
}

void backprop(const SoftmaxClassifier& model, const LoraAdapter* adapter, const FeatureVector& x, const Logits& g,
              bool train_base, Gradients& grads) {
  const std::size_t r = adapter ? adapter->rank : 0;
  std::vector<double> hid;
  if (model.hidden > 0) {
    hid = model.c;
    for (const auto& [i, v] : x.entries) {
      const double* vr = model.V.row(i);
      for (std::size_t h = 0; h < model.hidden; ++h) hid[h] += vr[h] * v;
    }
    for (double& h : hid) h = std::tanh(h);
  }
  // Visit the (index, value) pairs of the head input u.
  const auto for_each_input = [&](auto&& fn) {
    if (model.hidden == 0) {
      for (const auto& [i, v] : x.entries) fn(static_cast<std::size_t>(i), v);
    } else {
      for (std::size_t h = 0; h < model.hidden; ++h) fn(h, hid[h]);
    }
  };

  std::vector<double> s(r, 0.0), ag(r, 0.0);
  if (adapter) {
    for_each_input([&](std::size_t i, double u) {
      const double* b = adapter->B.row(i);
      for (std::size_t q = 0; q < r; ++q) s[q] += b[q] * u;
    });
    for (std::size_t q = 0; q < r; ++q) {
      const double* a = adapter->A.row(q);
      for (std::size_t k = 0; k < kNumCategories; ++k) ag[q] += a[k] * g[k];
      double* da = grads.A.row(q);
      for (std::size_t k = 0; k < kNumCategories; ++k) da[k] += s[q] * g[k];
    }
    for_each_input([&](std::size_t i, double u) {
      double* db = grads.B.row(i);
      for (std::size_t q = 0; q < r; ++q) db[q] += u * ag[q];
    });
  }
  if (!train_base) return;

  for (std::size_t k = 0; k < kNumCategories; ++k) grads.bias[k] += g[k];
  for_each_input([&](std::size_t i, double u) {
    double* dw = grads.W0.row(i);
    for (std::size_t k = 0; k < kNumCategories; ++k) dw[k] += u * g[k];
  });
  if (model.hidden == 0) return;

  std::vector<double> dpre(model.hidden, 0.0);
  for (std::size_t h = 0; h < model.hidden; ++h) {
    const double* w = model.W0.row(h);
    double du = 0.0;
    for (std::size_t k = 0; k < kNumCategories; ++k) du += w[k] * g[k];
    if (adapter) {
      const double* b = adapter->B.row(h);
      for (std::size_t q = 0; q < r; ++q) du += b[q] * ag[q];
    }
    dpre[h] = du * (1.0 - hid[h] * hid[h]);
    grads.c[h] += dpre[h];
  }
  for (const auto& [i, v] : x.entries) {
    double* dv = grads.V.row(i);
    for (std::size_t h = 0; h < model.hidden; ++h) dv[h] += v * dpre[h];
  }
}

ExampleLoss example_loss(const Logits& scores, Category y, const TrainConfig& config, RejectedSelector* selector) {
  ExampleLoss out;
  if (config.loss == LossKind::CrossEntropy) {
    out.loss = cross_entropy_logits(scores, y);
    out.grad = grad_cross_entropy(scores, y);
    return out;
  }
  const ProbDist dist = softmax(scores);
  out.rejected = selector ? selector->select(dist, y)
                          : select_rejected(dist, y, RejectedPolicy::HardestNegative, config.orpo.seed);
  out.loss = loss_orpo_logits(scores, y, out.rejected, config.orpo.lambda).total;
  out.grad = grad_orpo(scores, y, out.rejected, config.orpo.lambda);
  return out;
}

double evaluate_loss(const SoftmaxClassifier& model, const LoraAdapter* adapter, std::span<const LabeledVector> data,
                     const TrainConfig& config) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [x, y] : data) total += example_loss(forward_scores(model, adapter, x), y, config, nullptr).loss;
  return total / static_cast<double>(data.size());
}

std::vector<LabeledVector> featurize_all(std::span<const LabeledRecord> records, const FeatConfig& features) {
  std::vector<LabeledVector> out;
  out.reserve(records.size());
  for (const auto& lr : records) out.emplace_back(featurize(lr.record.text(), features), lr.label);
  return out;
}

TrainResult train(SoftmaxClassifier model, std::optional<LoraAdapter> adapter, std::span<const LabeledVector> data,
                  std::span<const LabeledVector> val, const TrainConfig& config, const StepObserver& observer) {
  validate(config);
  if (data.empty()) throw DataError("train: empty training set");
  if (val.empty()) throw DataError("train: empty validation set");
  check_classes(data);
  for (const auto& [x, y] : data) {
    if (x.dim != model.input_dim()) throw DataError("train: feature dimension does not match the model");
  }
  if (config.freeze_base && !adapter) throw ConfigError("train: freeze_base requires an adapter");
  const bool train_base = !config.freeze_base;

  LoraAdapter* ad = adapter ? &*adapter : nullptr;
  Gradients grads = Gradients::like(model, ad);
  auto blocks = trainable_blocks(model, ad, grads, train_base);
  AdamState adam;

  Rng shuffle_rng(derive_seed(config.seed, "train.shuffle"));
  RejectedSelector selector(config.orpo.rejected_policy, derive_seed(config.seed ^ config.orpo.seed, "train.rejected"));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  double best_val = 0.0;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    selector.set_epoch(epoch);
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      grads.zero();
      for (std::size_t b = start; b < end; ++b) {
        const auto& [x, y] = data[order[b]];
        auto ex = example_loss(forward_scores(model, ad, x), y, config, &selector);
        if (!std::isfinite(ex.loss)) {
          throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) + ", step " +
                                std::to_string(step + 1) + " (non-finite loss; learning rate " +
                                std::to_string(config.learning_rate) + " is likely too high)");
        }
        epoch_loss += ex.loss;
        for (double& gk : ex.grad) gk *= inv;
        backprop(model, ad, x, ex.grad, train_base, grads);
      }
      adamw_step(blocks, adam, config.learning_rate, config.adamw);
      ++step;
      if (observer) observer(step, model, ad);
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = epoch_loss / static_cast<double>(data.size());
    rec.val_loss = evaluate_loss(model, ad, val, config);
    rec.val_macro_f1 = macro_f1(model, ad, val);
    if (!std::isfinite(rec.val_loss)) throw DivergenceError("validation loss is not finite at epoch " + std::to_string(rec.epoch));
    if (epoch == 0 || rec.val_loss < best_val) {
      best_val = rec.val_loss;
      result.history.best_epoch = rec.epoch;
      result.best = {model, adapter};
    }
    result.history.epochs.push_back(rec);
  }
  result.final_state = {std::move(model), std::move(adapter)};
  return result;
}

}  // namespace fanal
