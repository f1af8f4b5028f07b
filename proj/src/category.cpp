// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/category.hpp"

#include "fanal/text.hpp"

namespace fanal {
namespace {

struct CategoryInfo {
  std::string_view code;
  std::string_view display;
  std::string_view definition;
};

constexpr std::array<CategoryInfo, kNumCategories> kInfo = {{
    {"MA", "M&A",
     "The process of combining two or more companies through various types of financial "
     "transactions, such as mergers, acquisitions, consolidations, or takeovers."},
    {"PublicMarketFinance", "Public Market Finance",
     "Refers to both borrowing money that must be repaid over time and the raising of capital by "
     "companies through the sale of securities, such as stocks or bonds, to the public on stock "
     "exchanges or other public markets."},
    {"PrivatePlacement", "Private Placement",
     "The sale of stocks, bonds, or securities directly to a private investor, rather than as part "
     "of a public offering."},
    {"IPO", "IPO",
     "Initial Public Offering; the process through which a privately-held company offers its "
     "shares to the public for the first time, allowing it to raise capital from public "
     "investors."},
    {"StrategicAlliances", "Strategic Alliances",
     "Collaborative agreements between independent entities aimed at achieving mutually "
     "beneficial objectives through shared resources and capabilities."},
    {"CompanyReorganization", "Company Reorganization and Structure Change",
     "The process of modifying a company's organizational setup and operational framework to "
     "adapt to market dynamics or achieve strategic goals."},
    {"SpinOffSplitOff", "Spin-Off/Split-Off",
     "The creation of a new, independent company through the sale or distribution of shares of "
     "an existing business division or subsidiary to shareholders."},
    {"Dividend", "Dividend",
     "A payment made by a corporation to its shareholders, usually in the form of cash or "
     "additional shares, representing a portion of the company's profits."},
    {"CreditRating", "Credit Rating",
     "An assessment of the creditworthiness of a borrower, typically issued by credit rating "
     "agencies, indicating the likelihood that the borrower will repay its debt obligations in a "
     "timely manner."},
    {"DebtDefault", "Debt Default",
     "Occurs when a borrower fails to meet its contractual obligations to repay its debt, such as "
     "failing to make interest or principal payments when due."},
    {"Bankruptcy", "Bankruptcy",
     "A legal process through which individuals or businesses that cannot repay their debts seek "
     "relief from some or all of their debts, usually through liquidation of assets or "
     "reorganization of debts under court supervision."},
    {"Other", "Other",
     "Refers to a variety of financial events or instruments not covered by the above "
     "categories, such as launching new products, additions to an index, and educational "
     "content."},
}};

}  // namespace

std::string_view display_name(Category c) noexcept { return kInfo[index_of(c)].display; }

std::string_view code_name(Category c) noexcept { return kInfo[index_of(c)].code; }

std::string_view definition(Category c) noexcept { return kInfo[index_of(c)].definition; }

std::optional<Category> category_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (iequals(name, kInfo[i].code) || iequals(name, kInfo[i].display)) return category_at(i);
  }
  return std::nullopt;
}

}  // namespace fanal
