// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/classifier.hpp"

#include <cmath>
#include <cstring>

#include "fanal/error.hpp"
#include "fanal/random.hpp"
#include "fanal/text.hpp"

namespace fanal {
namespace {

nlohmann::json matrix_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols) throw FormatError("matrix: data length does not match shape");
  for (double v : m.data) {
    if (!std::isfinite(v)) throw FormatError("matrix: non-finite entry");
  }
  return m;
}

void check_dim(const SoftmaxClassifier& model, const FeatureVector& x) {
  if (x.dim != model.input_dim()) {
    throw DataError("feature dimension " + std::to_string(x.dim) + " does not match model dimension " +
                    std::to_string(model.input_dim()));
  }
}

}  // namespace

std::size_t SoftmaxClassifier::parameter_count() const noexcept {
  return V.data.size() + c.size() + W0.data.size() + bias.size();
}

SoftmaxClassifier make_classifier(const FeatConfig& features, std::size_t hidden, std::uint64_t seed) {
  validate(features);
  SoftmaxClassifier m;
  m.features = features;
  m.hidden = hidden;
  if (hidden > 0) {
    m.V = Matrix(features.dim, hidden);
    m.c.assign(hidden, 0.0);
    Rng rng(derive_seed(seed, "classifier.hidden"));
    for (double& v : m.V.data) v = 0.1 * rng.gaussian();
  }
  m.W0 = Matrix(m.head_dim(), kNumCategories);
  return m;
}

LoraAdapter lora_wrap(const SoftmaxClassifier& model, std::size_t rank, std::uint64_t seed) {
  if (rank < 1 || rank >= kNumCategories) {
    throw ConfigError("lora rank must satisfy 1 <= r < 12, got " + std::to_string(rank));
  }
  LoraAdapter a;
  a.rank = rank;
  a.B = Matrix(model.head_dim(), rank);
  a.A = Matrix(rank, kNumCategories);
  Rng rng(derive_seed(seed, "lora.A"));
  for (double& v : a.A.data) v = 0.02 * rng.gaussian();
  return a;
}

Logits forward_scores(const SoftmaxClassifier& model, const LoraAdapter* adapter, const FeatureVector& x) {
  check_dim(model, x);
  Logits z = model.bias;
  std::vector<double> s(adapter ? adapter->rank : 0, 0.0);
  const auto accumulate = [&](std::size_t row, double u) {
    const double* w = model.W0.row(row);
    for (std::size_t k = 0; k < kNumCategories; ++k) z[k] += w[k] * u;
    if (adapter) {
      const double* b = adapter->B.row(row);
      for (std::size_t q = 0; q < adapter->rank; ++q) s[q] += b[q] * u;
    }
  };
  if (model.hidden == 0) {
    for (const auto& [i, v] : x.entries) accumulate(i, v);
  } else {
    std::vector<double> pre = model.c;
    for (const auto& [i, v] : x.entries) {
      const double* vr = model.V.row(i);
      for (std::size_t h = 0; h < model.hidden; ++h) pre[h] += vr[h] * v;
    }
    for (std::size_t h = 0; h < model.hidden; ++h) accumulate(h, std::tanh(pre[h]));
  }
  if (adapter) {
    for (std::size_t q = 0; q < adapter->rank; ++q) {
      const double* a = adapter->A.row(q);
      for (std::size_t k = 0; k < kNumCategories; ++k) z[k] += a[k] * s[q];
    }
  }
  return z;
}

ProbDist forward(const SoftmaxClassifier& model, const LoraAdapter* adapter, const FeatureVector& x) {
  return softmax(forward_scores(model, adapter, x));
}

Category decide(const ProbDist& dist, const DecisionPolicy& policy) {
  if (!policy.thresholds()) return dist.argmax();
  const auto hit = apply_threshold(dist, *policy.thresholds());
  return hit ? hit->first : Category::Other;
}

std::pair<Category, double> confidence(const SoftmaxClassifier& model, const LoraAdapter* adapter,
                                       const FeatureVector& x) {
  const auto dist = forward(model, adapter, x);
  const Category c = decide(dist, DecisionPolicy::argmax());
  return {c, dist[c]};
}

std::uint64_t hash_weights(const Matrix& m) noexcept {
  std::uint64_t h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&m.rows), sizeof m.rows));
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&m.cols), sizeof m.cols), h);
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(m.data.data()), m.data.size() * sizeof(double)), h);
}

nlohmann::json to_json(const SoftmaxClassifier& m) {
  nlohmann::json j = {{"features", to_json(m.features)},
                      {"hidden", m.hidden},
                      {"W0", matrix_json(m.W0)},
                      {"bias", m.bias}};
  if (m.hidden > 0) {
    j["V"] = matrix_json(m.V);
    j["c"] = m.c;
  }
  return j;
}

SoftmaxClassifier classifier_from_json(const nlohmann::json& j) {
  try {
    SoftmaxClassifier m;
    m.features = feat_config_from_json(j.at("features"));
    m.hidden = j.at("hidden").get<std::size_t>();
    m.W0 = matrix_from_json(j.at("W0"));
    m.bias = j.at("bias").get<Logits>();
    if (m.hidden > 0) {
      m.V = matrix_from_json(j.at("V"));
      m.c = j.at("c").get<std::vector<double>>();
      if (m.V.rows != m.input_dim() || m.V.cols != m.hidden || m.c.size() != m.hidden) {
        throw FormatError("classifier: hidden layer shape mismatch");
      }
    }
    if (m.W0.rows != m.head_dim() || m.W0.cols != kNumCategories) throw FormatError("classifier: W0 shape mismatch");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("classifier: ") + e.what());
  }
}

nlohmann::json to_json(const LoraAdapter& a) {
  return {{"rank", a.rank}, {"B", matrix_json(a.B)}, {"A", matrix_json(a.A)}};
}

LoraAdapter lora_from_json(const nlohmann::json& j) {
  try {
    LoraAdapter a;
    a.rank = j.at("rank").get<std::size_t>();
    a.B = matrix_from_json(j.at("B"));
    a.A = matrix_from_json(j.at("A"));
    if (a.B.cols != a.rank || a.A.rows != a.rank || a.A.cols != kNumCategories) {
      throw FormatError("lora adapter: shape mismatch");
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("lora adapter: ") + e.what());
  }
}

nlohmann::json to_json(const ClassifierBundle& b) {
  nlohmann::json j = {{"format", "fanal.classifier"}, {"version", kClassifierVersion}, {"model", to_json(b.model)}};
  if (b.adapter) j["adapter"] = to_json(*b.adapter);
  return j;
}

ClassifierBundle classifier_bundle_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != "fanal.classifier") throw FormatError("not a classifier document");
  if (j.value("version", -1) != kClassifierVersion) {
    throw FormatError("classifier version mismatch: expected " + std::to_string(kClassifierVersion));
  }
  ClassifierBundle b;
  b.model = classifier_from_json(j.at("model"));
  if (j.contains("adapter")) {
    b.adapter = lora_from_json(j.at("adapter"));
    if (b.adapter->B.rows != b.model.head_dim()) throw FormatError("lora adapter: B rows do not match the head");
  }
  return b;
}

}  // namespace fanal
