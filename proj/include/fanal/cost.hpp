// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace fanal {

inline constexpr double kCostReferenceArticles = 10000.0;

/// Compute billed by the hour.
struct HourlyMode {
  double hours_per_10k = 0.0;
  double rate_per_hour = 0.0;
};

/// Per-token API billing. Prices are per token.
struct ApiMode {
  double input_tokens_per_article = 0.0;
  double output_tokens_per_article = 0.0;
  double price_in = 0.0;
  double price_out = 0.0;
  double hours_per_10k = 0.0;
};

/// Published time and dollar figures for 10k articles, scaled linearly.
struct PresetMode {
  std::string name;
  double hours_per_10k = 0.0;
  double cost_per_10k = 0.0;
};

using CostMode = std::variant<HourlyMode, ApiMode, PresetMode>;

struct CostEstimate {
  std::uint64_t articles = 0;
  double inference_hours = 0.0;
  double total_cost = 0.0;
  std::string mode;
};

/// Throws ConfigError on negative inputs.
CostEstimate cost_estimate(std::uint64_t articles, const CostMode& mode);

/// gpt-4o, llama-3.1, phi-3, fanal.
const std::vector<PresetMode>& cost_presets();
std::optional<PresetMode> find_cost_preset(std::string_view name);

nlohmann::json to_json(const CostEstimate& e);
CostEstimate cost_estimate_from_json(const nlohmann::json& j);

}  // namespace fanal
