// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fanal/category.hpp"

namespace fanal {

enum class TemplateVariant { T1, T2, T3 };

std::string_view to_string(TemplateVariant v) noexcept;
/// "T1", "T2" or "T3" (case-insensitive). Throws ConfigError.
TemplateVariant template_variant_from_string(std::string_view s);

struct FewShotExample {
  std::string sentence;
  Category label = Category::Other;
};

/// T1 carries neither definitions nor examples, T2 adds a definition per
/// category, T3 adds few-shot examples on top.
struct PromptTemplate {
  TemplateVariant variant = TemplateVariant::T1;
  std::array<std::string, kNumCategories> definitions;
  std::vector<FewShotExample> examples;

  /// The bundled wording for each variant.
  static PromptTemplate standard(TemplateVariant v);
};

/// Marks the target sentence at the end of every prompt.
inline constexpr std::string_view kSentenceFence = "\"\"\"";

std::string render_prompt(const PromptTemplate& tmpl, std::string_view sentence);

/// Extracts the fenced target sentence; nullopt if the prompt has none.
std::optional<std::string> target_sentence(std::string_view prompt);

/// nullopt means the response is unparseable. Cascade: the whole cleaned
/// response is a category name, then an alias, then the leftmost category
/// name or alias occurring as a whole word.
std::optional<Category> parse_response(std::string_view text);

}  // namespace fanal
