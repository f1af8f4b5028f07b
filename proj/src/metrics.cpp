// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "fanal/error.hpp"

namespace fanal {
namespace {

double ratio(std::size_t num, std::size_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

constexpr const char* kRateRows[] = {"precision", "recall", "f1", "acc_recall", "acc_jaccard"};
constexpr const char* kCountRows[] = {"tp", "fp", "fn", "support"};

}  // namespace

std::size_t ConfusionMatrix::support(Category c) const noexcept {
  std::size_t s = 0;
  for (std::size_t p = 0; p < kNumCategories; ++p) s += cells_[index_of(c)][p];
  return s;
}

std::size_t ConfusionMatrix::predicted(Category c) const noexcept {
  std::size_t s = 0;
  for (std::size_t g = 0; g < kNumCategories; ++g) s += cells_[g][index_of(c)];
  return s;
}

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t s = 0;
  for (const auto& row : cells_) {
    for (std::size_t v : row) s += v;
  }
  return s;
}

std::size_t ConfusionMatrix::trace() const noexcept {
  std::size_t s = 0;
  for (std::size_t k = 0; k < kNumCategories; ++k) s += cells_[k][k];
  return s;
}

ConfusionMatrix confusion(std::span<const std::pair<Category, Category>> gold_predicted) {
  ConfusionMatrix cm;
  for (const auto& [g, p] : gold_predicted) cm.add(g, p);
  return cm;
}

MetricsReport metrics_from_counts(std::span<const ClassMetrics> counts, std::size_t n) {
  if (n == 0) throw DataError("metrics: no predictions");
  if (counts.size() != kNumCategories) throw DataError("metrics: expected 12 classes");
  MetricsReport r;
  r.n = n;
  std::size_t active = 0, tp_sum = 0;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    ClassMetrics m;
    m.tp = counts[k].tp;
    m.fp = counts[k].fp;
    m.fn = counts[k].fn;
    m.support = counts[k].support;
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.recall = ratio(m.tp, m.tp + m.fn);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.accuracy_recall_style = m.recall;
    m.accuracy_jaccard_style = ratio(m.tp, m.tp + m.fp + m.fn);
    tp_sum += m.tp;
    if (m.support > 0 || m.tp + m.fp > 0) {
      ++active;
      r.macro_precision += m.precision;
      r.macro_recall += m.recall;
      r.macro_f1 += m.f1;
    }
    r.per_class[k] = m;
  }
  if (active > 0) {
    r.macro_precision /= static_cast<double>(active);
    r.macro_recall /= static_cast<double>(active);
    r.macro_f1 /= static_cast<double>(active);
  }
  r.micro_accuracy = ratio(tp_sum, n);
  return r;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  std::array<ClassMetrics, kNumCategories> counts{};
  for (Category c : kAllCategories) {
    auto& m = counts[index_of(c)];
    m.tp = cm(c, c);
    m.support = cm.support(c);
    m.fp = cm.predicted(c) - m.tp;
    m.fn = m.support - m.tp;
  }
  return metrics_from_counts(counts, cm.total());
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json classes = nlohmann::json::object();
  for (Category c : kAllCategories) {
    const auto& m = r[c];
    classes[std::string(code_name(c))] = {{"tp", m.tp},
                                          {"fp", m.fp},
                                          {"fn", m.fn},
                                          {"support", m.support},
                                          {"precision", m.precision},
                                          {"recall", m.recall},
                                          {"f1", m.f1},
                                          {"accuracy_recall_style", m.accuracy_recall_style},
                                          {"accuracy_jaccard_style", m.accuracy_jaccard_style}};
  }
  return {{"n", r.n},
          {"micro_accuracy", r.micro_accuracy},
          {"macro_precision", r.macro_precision},
          {"macro_recall", r.macro_recall},
          {"macro_f1", r.macro_f1},
          {"per_class", std::move(classes)}};
}

MetricsReport metrics_report_from_json(const nlohmann::json& j) {
  try {
    MetricsReport r;
    r.n = j.at("n").get<std::size_t>();
    r.micro_accuracy = j.at("micro_accuracy").get<double>();
    r.macro_precision = j.at("macro_precision").get<double>();
    r.macro_recall = j.at("macro_recall").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    for (Category c : kAllCategories) {
      const auto& e = j.at("per_class").at(std::string(code_name(c)));
      auto& m = r.per_class[index_of(c)];
      m.tp = e.at("tp").get<std::size_t>();
      m.fp = e.at("fp").get<std::size_t>();
      m.fn = e.at("fn").get<std::size_t>();
      m.support = e.at("support").get<std::size_t>();
      m.precision = e.at("precision").get<double>();
      m.recall = e.at("recall").get<double>();
      m.f1 = e.at("f1").get<double>();
      m.accuracy_recall_style = e.at("accuracy_recall_style").get<double>();
      m.accuracy_jaccard_style = e.at("accuracy_jaccard_style").get<double>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("metrics report: ") + e.what());
  }
}

std::string render_table(std::span<const NamedReport> reports) {
  constexpr int kCol = 8;
  std::size_t name_w = 5;
  for (const auto& nr : reports) {
    if (nr.model.empty() || nr.model.find_first_of(" \t\n") != std::string::npos) {
      throw FormatError("render_table: model names must be non-empty and contain no whitespace");
    }
    name_w = std::max(name_w, nr.model.size());
  }

  std::ostringstream out;
  const auto row_head = [&](const std::string& model, const char* metric) {
    out << std::left << std::setw(static_cast<int>(name_w) + 2) << model << std::setw(13) << metric << std::right;
  };
  row_head("model", "metric");
  for (Category c : kAllCategories) out << ' ' << std::setw(kCol) << code_name(c);
  out << '\n';
  for (const auto& nr : reports) {
    const auto& r = nr.report;
    for (std::size_t m = 0; m < std::size(kRateRows); ++m) {
      row_head(nr.model, kRateRows[m]);
      for (const auto& cm : r.per_class) {
        const double v = m == 0   ? cm.precision
                         : m == 1 ? cm.recall
                         : m == 2 ? cm.f1
                         : m == 3 ? cm.accuracy_recall_style
                                  : cm.accuracy_jaccard_style;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
        out << ' ' << std::setw(kCol) << buf;
      }
      out << '\n';
    }
    for (std::size_t m = 0; m < std::size(kCountRows); ++m) {
      row_head(nr.model, kCountRows[m]);
      for (const auto& cm : r.per_class) {
        out << ' ' << std::setw(kCol) << (m == 0 ? cm.tp : m == 1 ? cm.fp : m == 2 ? cm.fn : cm.support);
      }
      out << '\n';
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "n=%zu micro_accuracy=%.2f macro_precision=%.2f macro_recall=%.2f macro_f1=%.2f",
                  r.n, 100.0 * r.micro_accuracy, 100.0 * r.macro_precision, 100.0 * r.macro_recall,
                  100.0 * r.macro_f1);
    row_head(nr.model, "summary");
    out << buf << '\n';
  }
  return out.str();
}

std::vector<NamedReport> parse_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("parse_table: empty input");
  {
    std::istringstream head(line);
    std::string a, b, code;
    head >> a >> b;
    if (a != "model" || b != "metric") throw FormatError("parse_table: bad header");
    for (Category c : kAllCategories) {
      if (!(head >> code) || code != code_name(c)) throw FormatError("parse_table: bad category header");
    }
  }

  std::vector<NamedReport> out;
  std::string model;
  std::array<ClassMetrics, kNumCategories> counts{};
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string name, metric;
    row >> name >> metric;
    if (model.empty()) model = name;
    if (name != model) throw FormatError("parse_table: rows of '" + model + "' are incomplete");

    const auto count_row = std::find(std::begin(kCountRows), std::end(kCountRows), metric);
    if (count_row != std::end(kCountRows)) {
      for (auto& m : counts) {
        std::size_t v = 0;
        if (!(row >> v)) throw FormatError("parse_table: bad count in row " + metric);
        switch (count_row - std::begin(kCountRows)) {
          case 0: m.tp = v; break;
          case 1: m.fp = v; break;
          case 2: m.fn = v; break;
          default: m.support = v; break;
        }
      }
    } else if (metric == "summary") {
      std::string field;
      row >> field;
      if (field.rfind("n=", 0) != 0) throw FormatError("parse_table: summary without n");
      const std::size_t n = std::stoul(field.substr(2));
      out.push_back({model, metrics_from_counts(counts, n)});
      model.clear();
      counts = {};
    } else if (std::find(std::begin(kRateRows), std::end(kRateRows), metric) == std::end(kRateRows)) {
      throw FormatError("parse_table: unknown metric row '" + metric + "'");
    }
  }
  if (!model.empty()) throw FormatError("parse_table: missing summary row for '" + model + "'");
  return out;
}

MarginReport confidence_margin_report(std::span<const ScoredPrediction> a, std::span<const ScoredPrediction> b) {
  if (a.size() != b.size()) throw DataError("confidence_margin_report: lists differ in length");
  MarginReport r;
  r.n = a.size();
  std::vector<double> ca, cb;
  std::size_t greater = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].correct) ca.push_back(a[i].confidence);
    if (b[i].correct) cb.push_back(b[i].confidence);
    r.deltas.push_back(a[i].confidence - b[i].confidence);
    greater += a[i].confidence > b[i].confidence;
  }
  r.correct_a = ca.size();
  r.correct_b = cb.size();
  r.mean_correct_a = mean(ca);
  r.mean_correct_b = mean(cb);
  r.median_correct_a = median(std::move(ca));
  r.median_correct_b = median(std::move(cb));
  r.fraction_a_greater = ratio(greater, r.n);
  return r;
}

nlohmann::json to_json(const MarginReport& r) {
  return {{"n", r.n},
          {"correct_a", r.correct_a},
          {"correct_b", r.correct_b},
          {"mean_correct_a", r.mean_correct_a},
          {"mean_correct_b", r.mean_correct_b},
          {"median_correct_a", r.median_correct_a},
          {"median_correct_b", r.median_correct_b},
          {"fraction_a_greater", r.fraction_a_greater},
          {"deltas", r.deltas}};
}

}  // namespace fanal
