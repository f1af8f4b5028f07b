// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace fanal {

/// The twelve financial event categories. The underlying value is the stable
/// index used for tie-breaking everywhere in the library.
enum class Category : std::uint8_t {
  MA = 0,
  PublicMarketFinance,
  PrivatePlacement,
  IPO,
  StrategicAlliances,
  CompanyReorganization,
  SpinOffSplitOff,
  Dividend,
  CreditRating,
  DebtDefault,
  Bankruptcy,
  Other,
};

inline constexpr std::size_t kNumCategories = 12;

inline constexpr std::array<Category, kNumCategories> kAllCategories = {
    Category::MA,
    Category::PublicMarketFinance,
    Category::PrivatePlacement,
    Category::IPO,
    Category::StrategicAlliances,
    Category::CompanyReorganization,
    Category::SpinOffSplitOff,
    Category::Dividend,
    Category::CreditRating,
    Category::DebtDefault,
    Category::Bankruptcy,
    Category::Other,
};

constexpr std::size_t index_of(Category c) noexcept { return static_cast<std::size_t>(c); }

/// Precondition: i < kNumCategories.
constexpr Category category_at(std::size_t i) noexcept { return static_cast<Category>(i); }

/// Human-readable heading, e.g. "M&A" or "Spin-Off/Split-Off".
std::string_view display_name(Category c) noexcept;

/// Identifier-style name used in JSON artifacts, e.g. "MA".
std::string_view code_name(Category c) noexcept;

/// One-paragraph definition of the category.
std::string_view definition(Category c) noexcept;

/// Accepts either the code name or the display name, case-insensitively.
std::optional<Category> category_from_name(std::string_view name) noexcept;

/// A subset of categories; used to restrict candidate sets.
using CategorySet = std::bitset<kNumCategories>;

inline CategorySet all_categories() { return CategorySet{}.set(); }

}  // namespace fanal
