// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/prompt.hpp"

#include <cctype>
#include <utility>

#include <json.hpp>

#include "fanal/error.hpp"
#include "fanal/text.hpp"

namespace fanal {
namespace {

constexpr std::string_view kRoleLine =
    "You are a financial analyst. Classify the news sentences into one of the twelve categories mentioned below "
    "and return only the category name. An entity could be an organization, a location, a place, a person, or a "
    "group. If no entities are tagged in the sentence, classify it as the \"Other\" category.";

constexpr std::array<Category, kNumCategories> kListingOrder = {
    Category::MA,           Category::PublicMarketFinance,   Category::PrivatePlacement,
    Category::IPO,          Category::StrategicAlliances,    Category::CompanyReorganization,
    Category::Dividend,     Category::CreditRating,          Category::SpinOffSplitOff,
    Category::DebtDefault,  Category::Bankruptcy,            Category::Other};

constexpr std::string_view kMaDefinition =
    "Mergers and Acquisitions - consolidation of companies or assets through various forms of financial "
    "transactions, including mergers, acquisitions, consolidations, and purchase of assets.";

constexpr std::string_view kOtherDefinition =
    "For content that does not fit into the specified categories, encompassing a broad range of general "
    "financial topics not tied to specific entities.";

const std::vector<FewShotExample>& standard_examples() {
  static const std::vector<FewShotExample> examples = {
      {"Hardesty & Hanover Acquires Corven Engineering.", Category::MA},
      {"Talbot Foods agrees to a takeover and buyout by a rival in an all-cash merger.", Category::MA},
      {"Westbrook Utilities prices underwritten convertible notes.", Category::PublicMarketFinance},
      {"Harlow Bank sells debentures and bonds on the public exchange.", Category::PublicMarketFinance},
      {"ATHA Energy increases private placement offering up to $22.84M.", Category::PrivatePlacement},
      {"Corbin Minerals closes an unregistered subscription tranche with accredited buyers.",
       Category::PrivatePlacement},
      {"Vantage Robotics files its IPO prospectus ahead of a Nasdaq listing debut.", Category::IPO},
      {"Selwyn Brewing prepares a flotation in London.", Category::IPO},
      {"Ardent Health and Kyoto Devices form an alliance and joint venture.", Category::StrategicAlliances},
      {"The collaboration makes the two firms long-term partners in a research partnership.",
       Category::StrategicAlliances},
      {"Beaumont Retail restructures operations with layoffs in a broad overhaul.", Category::CompanyReorganization},
      {"The reorganization follows a restructuring review at Calder Mills.", Category::CompanyReorganization},
      {"Carrow Group finalizes the spinoff and demerger of its chemicals unit.", Category::SpinOffSplitOff},
      {"The carveout marks a separation and splitoff of the Tessary division.", Category::SpinOffSplitOff},
      {"Dorset Mining declares a special dividend.", Category::Dividend},
      {"Yardley Foods raises its payout as dividends and a higher yield are approved.", Category::Dividend},
      {"Moody's issues a downgrade of Ellison Steel and revises its outlook.", Category::CreditRating},
      {"An upgrade to the Fenwick Rail rating reflects improved creditworthiness.", Category::CreditRating},
      {"Greystone Property defaults on its coupon payments.", Category::DebtDefault},
      {"Halvern Ports falls into arrears after a missed payment and a default.", Category::DebtDefault},
      {"Farrow Airlines files for chapter 11 bankruptcy protection.", Category::Bankruptcy},
      {"A court orders liquidation after the insolvency and receivership of Bexley Textiles.", Category::Bankruptcy},
      {"Ipswich Software launches a new product index.", Category::Other},
      {"Marlow Media unveils an upcoming webinar series.", Category::Other},
  };
  return examples;
}

bool is_word_char(char c) noexcept { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Every spelling the cascade recognizes, lowercased.
const std::vector<std::pair<std::string, Category>>& names_and_aliases(bool include_aliases) {
  static const auto build = [](bool aliases) {
    std::vector<std::pair<std::string, Category>> out;
    for (Category c : kAllCategories) {
      out.emplace_back(to_lower_ascii(display_name(c)), c);
      out.emplace_back(to_lower_ascii(code_name(c)), c);
    }
    if (!aliases) return out;
    const std::pair<const char*, Category> table[] = {
        {"mergers and acquisitions", Category::MA},
        {"mergers & acquisitions", Category::MA},
        {"merger and acquisition", Category::MA},
        {"m and a", Category::MA},
        {"public market", Category::PublicMarketFinance},
        {"public markets finance", Category::PublicMarketFinance},
        {"private placements", Category::PrivatePlacement},
        {"initial public offering", Category::IPO},
        {"initial public offerings", Category::IPO},
        {"strategic alliance", Category::StrategicAlliances},
        {"company reorganization", Category::CompanyReorganization},
        {"corporate reorganization", Category::CompanyReorganization},
        {"structure change", Category::CompanyReorganization},
        {"spin-off", Category::SpinOffSplitOff},
        {"split-off", Category::SpinOffSplitOff},
        {"spin off", Category::SpinOffSplitOff},
        {"split off", Category::SpinOffSplitOff},
        {"spinoff", Category::SpinOffSplitOff},
        {"spin-off/split-off", Category::SpinOffSplitOff},
        {"dividends", Category::Dividend},
        {"credit ratings", Category::CreditRating},
        {"debt defaults", Category::DebtDefault},
        {"bankruptcies", Category::Bankruptcy},
    };
    for (const auto& [s, c] : table) out.emplace_back(s, c);
    return out;
  };
  static const auto with = build(true);
  static const auto without = build(false);
  return include_aliases ? with : without;
}

std::string clean(std::string_view text) {
  std::string s;
  for (char ch : text) {
    if (ch == '*' || ch == '_' || ch == '`' || ch == '#' || ch == '"') continue;
    s += ch;
  }
  constexpr std::string_view kEdge = " \t\r\n.:;,!?()[]{}'-";
  const auto b = s.find_first_not_of(kEdge);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(kEdge);
  return to_lower_ascii(std::string_view(s).substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(TemplateVariant v) noexcept {
  switch (v) {
    case TemplateVariant::T1:
      return "T1";
    case TemplateVariant::T2:
      return "T2";
    case TemplateVariant::T3:
      return "T3";
  }
  return "T1";
}

TemplateVariant template_variant_from_string(std::string_view s) {
  if (iequals(s, "T1")) return TemplateVariant::T1;
  if (iequals(s, "T2")) return TemplateVariant::T2;
  if (iequals(s, "T3")) return TemplateVariant::T3;
  throw ConfigError("unknown template '" + std::string(s) + "' (expected T1, T2 or T3)");
}

PromptTemplate PromptTemplate::standard(TemplateVariant v) {
  PromptTemplate t;
  t.variant = v;
  if (v == TemplateVariant::T1) return t;
  for (Category c : kAllCategories) t.definitions[index_of(c)] = std::string(definition(c));
  t.definitions[index_of(Category::MA)] = std::string(kMaDefinition);
  t.definitions[index_of(Category::Other)] = std::string(kOtherDefinition);
  if (v == TemplateVariant::T3) t.examples = standard_examples();
  return t;
}

std::string render_prompt(const PromptTemplate& tmpl, std::string_view sentence) {
  std::string out(kRoleLine);
  out += "\n\nCategories: ";
  for (std::size_t i = 0; i < kListingOrder.size(); ++i) {
    if (i) out += ", ";
    out += display_name(kListingOrder[i]);
  }
  out += ".\n";
  if (tmpl.variant != TemplateVariant::T1) {
    out += "\nDefinitions:\n";
    for (Category c : kListingOrder) {
      out += "- ";
      out += display_name(c);
      out += ": ";
      out += tmpl.definitions[index_of(c)];
      out += '\n';
    }
  }
  if (tmpl.variant == TemplateVariant::T3 && !tmpl.examples.empty()) {
    out += "\nExamples for each category are:\n";
    for (const auto& ex : tmpl.examples) {
      nlohmann::ordered_json j = {{"sentence", ex.sentence}, {"category", std::string(display_name(ex.label))}};
      out += j.dump() + ",\n";
    }
  }
  out += "\nSentence:\n";
  out += kSentenceFence;
  out += '\n';
  out += sentence;
  out += '\n';
  out += kSentenceFence;
  return out;
}

std::optional<std::string> target_sentence(std::string_view prompt) {
  const std::string open = "\nSentence:\n" + std::string(kSentenceFence) + "\n";
  const std::string close = "\n" + std::string(kSentenceFence);
  const auto b = prompt.rfind(open);
  if (b == std::string_view::npos) return std::nullopt;
  if (prompt.size() < close.size() || prompt.substr(prompt.size() - close.size()) != close) return std::nullopt;
  const auto start = b + open.size();
  const auto end = prompt.size() - close.size();
  if (end < start) return std::nullopt;
  return std::string(prompt.substr(start, end - start));
}

std::optional<Category> parse_response(std::string_view text) {
  const std::string cleaned = clean(text);
  if (cleaned.empty()) return std::nullopt;
  for (const auto& [name, c] : names_and_aliases(false)) {
    if (cleaned == name) return c;
  }
  for (const auto& [name, c] : names_and_aliases(true)) {
    if (cleaned == name) return c;
  }

  const std::string lower = to_lower_ascii(text);
  std::size_t best_pos = std::string::npos, best_len = 0;
  std::optional<Category> best;
  for (const auto& [name, c] : names_and_aliases(true)) {
    for (std::size_t pos = lower.find(name); pos != std::string::npos; pos = lower.find(name, pos + 1)) {
      const bool left_ok = pos == 0 || !is_word_char(lower[pos - 1]) || !is_word_char(name.front());
      const std::size_t after = pos + name.size();
      const bool right_ok = after >= lower.size() || !is_word_char(lower[after]) || !is_word_char(name.back());
      if (!left_ok || !right_ok) continue;
      if (pos < best_pos || (pos == best_pos && name.size() > best_len)) {
        best_pos = pos;
        best_len = name.size();
        best = c;
      }
      break;
    }
  }
  return best;
}

}  // namespace fanal
