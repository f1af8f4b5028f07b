// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/cost.hpp"

#include "fanal/error.hpp"
#include "fanal/text.hpp"

namespace fanal {
namespace {

void require_non_negative(double v, const char* what) {
  if (!(v >= 0.0)) throw ConfigError(std::string("cost: ") + what + " must be >= 0");
}

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

CostEstimate cost_estimate(std::uint64_t articles, const CostMode& mode) {
  const double scale = static_cast<double>(articles) / kCostReferenceArticles;
  CostEstimate e;
  e.articles = articles;
  std::visit(Overloaded{
                 [&](const HourlyMode& m) {
                   require_non_negative(m.hours_per_10k, "hours_per_10k");
                   require_non_negative(m.rate_per_hour, "rate_per_hour");
                   e.mode = "hourly";
                   e.inference_hours = m.hours_per_10k * scale;
                   e.total_cost = e.inference_hours * m.rate_per_hour;
                 },
                 [&](const ApiMode& m) {
                   require_non_negative(m.input_tokens_per_article, "input_tokens_per_article");
                   require_non_negative(m.output_tokens_per_article, "output_tokens_per_article");
                   require_non_negative(m.price_in, "price_in");
                   require_non_negative(m.price_out, "price_out");
                   require_non_negative(m.hours_per_10k, "hours_per_10k");
                   e.mode = "api";
                   e.inference_hours = m.hours_per_10k * scale;
                   const double per_article =
                       m.input_tokens_per_article * m.price_in + m.output_tokens_per_article * m.price_out;
                   e.total_cost = per_article * static_cast<double>(articles);
                 },
                 [&](const PresetMode& m) {
                   require_non_negative(m.hours_per_10k, "hours_per_10k");
                   require_non_negative(m.cost_per_10k, "cost_per_10k");
                   e.mode = "preset:" + m.name;
                   e.inference_hours = m.hours_per_10k * scale;
                   e.total_cost = m.cost_per_10k * scale;
                 },
             },
             mode);
  return e;
}

const std::vector<PresetMode>& cost_presets() {
  static const std::vector<PresetMode> presets = {
      {"gpt-4o", 1.579, 204.8675},
      {"llama-3.1", 0.642, 0.8363},
      {"phi-3", 2.254, 2.9362},
      {"fanal", 0.013, 0.0017},
  };
  return presets;
}

std::optional<PresetMode> find_cost_preset(std::string_view name) {
  for (const auto& p : cost_presets()) {
    if (iequals(p.name, name)) return p;
  }
  return std::nullopt;
}

nlohmann::json to_json(const CostEstimate& e) {
  return {{"articles", e.articles}, {"inference_hours", e.inference_hours}, {"total_cost", e.total_cost},
          {"mode", e.mode}};
}

CostEstimate cost_estimate_from_json(const nlohmann::json& j) {
  try {
    CostEstimate e;
    e.articles = j.at("articles").get<std::uint64_t>();
    e.inference_hours = j.at("inference_hours").get<double>();
    e.total_cost = j.at("total_cost").get<double>();
    e.mode = j.at("mode").get<std::string>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("cost estimate: ") + ex.what());
  }
}

}  // namespace fanal
