// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/silver.hpp"

#include <cmath>

#include "fanal/error.hpp"

namespace fanal {

void ThresholdTable::set(Category c, double value) {
  if (!(value > 0.0 && value <= 1.0)) throw ConfigError("threshold must be in (0, 1]");
  t_[index_of(c)] = value;
}

ThresholdTable ThresholdTable::reference_preset() {
  ThresholdTable t;
  t.set(Category::MA, 0.96);
  t.set(Category::PublicMarketFinance, 0.98);
  t.set(Category::PrivatePlacement, 0.80);
  t.set(Category::IPO, 0.90);
  t.set(Category::SpinOffSplitOff, 0.88);
  t.set(Category::Dividend, 0.90);
  t.set(Category::CreditRating, 0.88);
  t.set(Category::DebtDefault, 0.75);
  t.set(Category::Bankruptcy, 0.70);
  t.set(Category::Other, 0.90);
  t.set(Category::StrategicAlliances, 0.90);
  t.set(Category::CompanyReorganization, 0.90);
  return t;
}

nlohmann::json to_json(const ThresholdTable& table) {
  nlohmann::json j = nlohmann::json::object();
  for (Category c : kAllCategories) j[std::string(code_name(c))] = table[c];
  return j;
}

ThresholdTable threshold_table_from_json(const nlohmann::json& j) {
  ThresholdTable t;
  for (Category c : kAllCategories) {
    const std::string key(code_name(c));
    if (!j.contains(key)) throw FormatError("threshold table: missing category " + key);
    t.set(c, j.at(key).get<double>());
  }
  return t;
}

std::optional<std::pair<Category, double>> apply_threshold(const ProbDist& dist, const ThresholdTable& table) {
  const Category c = dist.argmax();
  const double p = dist[c];
  if (p >= table[c]) return std::make_pair(c, p);
  return std::nullopt;
}

std::optional<double> precision_at(std::span<const ScoredExample> validation, Category c, double t) {
  std::size_t accepted = 0, correct = 0;
  for (const auto& ex : validation) {
    if (ex.dist.argmax() != c || ex.dist[c] < t) continue;
    ++accepted;
    if (ex.gold == c) ++correct;
  }
  if (accepted == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(accepted);
}

Calibration calibrate_thresholds(std::span<const ScoredExample> validation, double target_precision,
                                 double grid_step) {
  if (validation.empty()) throw DataError("calibrate_thresholds: empty validation set");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw ConfigError("calibrate_thresholds: grid_step must be in (0, 1]");
  const auto points = std::llround(1.0 / grid_step);
  if (std::abs(static_cast<double>(points) * grid_step - 1.0) > 1e-9) {
    throw ConfigError("calibrate_thresholds: 1 / grid_step must be an integer");
  }

  Calibration cal;
  for (Category c : kAllCategories) {
    bool found = false;
    for (long long k = 1; k <= points; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(points);
      const auto prec = precision_at(validation, c, t);
      if (prec && *prec >= target_precision) {
        cal.table.set(c, t);
        cal.precision[index_of(c)] = *prec;
        found = true;
        break;
      }
    }
    if (!found) {
      cal.table.set(c, 1.0);
      cal.unattained.push_back(c);
      cal.precision[index_of(c)] = precision_at(validation, c, 1.0).value_or(0.0);
    }
    for (const auto& ex : validation) {
      if (ex.dist.argmax() == c && ex.dist[c] >= cal.table[c]) ++cal.accepted[index_of(c)];
    }
  }
  return cal;
}

Calibration calibrate_thresholds(const GbtEnsemble& model, const FeatConfig& features,
                                 std::span<const LabeledRecord> validation, double target_precision,
                                 double grid_step) {
  std::vector<ScoredExample> scored;
  scored.reserve(validation.size());
  for (const auto& lr : validation) {
    scored.push_back({gbt_predict_proba(model, featurize(lr.record.text(), features)), lr.label});
  }
  return calibrate_thresholds(scored, target_precision, grid_step);
}

SilverSet build_silver_set(std::span<const NewsRecord> pool, const GbtEnsemble& model, const FeatConfig& features,
                           const ThresholdTable& table, const std::unordered_set<std::string>& exclude_ids) {
  SilverSet out;
  for (const auto& rec : pool) {
    if (exclude_ids.count(rec.id)) {
      ++out.excluded;
      continue;
    }
    const auto hit = apply_threshold(gbt_predict_proba(model, featurize(rec.text(), features)), table);
    if (!hit) {
      ++out.below_threshold;
      continue;
    }
    out.records.push_back({rec, hit->first, Provenance::silver(hit->second)});
    ++out.histogram[index_of(hit->first)];
  }
  return out;
}

nlohmann::json histogram_json(const std::array<std::size_t, kNumCategories>& histogram) {
  nlohmann::json j = nlohmann::json::object();
  for (Category c : kAllCategories) j[std::string(code_name(c))] = histogram[index_of(c)];
  return j;
}

nlohmann::json to_json(const SilverModel& model) {
  nlohmann::json j = to_json(model.ensemble);
  j["format"] = "fanal.silver-model";
  j["version"] = kSilverModelVersion;
  j["features"] = to_json(model.features);
  if (model.thresholds) j["thresholds"] = to_json(*model.thresholds);
  return j;
}

SilverModel silver_model_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != "fanal.silver-model") {
    throw FormatError("not a silver model document");
  }
  if (j.value("version", -1) != kSilverModelVersion) {
    throw FormatError("silver model version mismatch: expected " + std::to_string(kSilverModelVersion));
  }
  SilverModel m;
  m.features = feat_config_from_json(j.at("features"));
  m.ensemble = gbt_from_json(j);
  if (j.contains("thresholds")) m.thresholds = threshold_table_from_json(j.at("thresholds"));
  return m;
}

}  // namespace fanal
