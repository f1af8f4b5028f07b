// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/synthetic.hpp"

#include <cstdio>

#include "fanal/random.hpp"

namespace fanal {
namespace {

using Lexicon = std::array<std::string_view, 5>;

constexpr std::array<Lexicon, kNumCategories> kLexicons = {{
    {"merger", "acquires", "acquisition", "takeover", "buyout"},
    {"convertible", "bonds", "debentures", "notes", "underwritten"},
    {"placement", "unregistered", "accredited", "subscription", "tranche"},
    {"ipo", "listing", "debut", "prospectus", "flotation"},
    {"alliance", "partnership", "collaboration", "venture", "partners"},
    {"restructures", "reorganization", "restructuring", "layoffs", "overhaul"},
    {"spinoff", "demerger", "carveout", "separation", "splitoff"},
    {"dividend", "dividends", "payout", "yield", "declares"},
    {"downgrade", "upgrade", "rating", "outlook", "creditworthiness"},
    {"default", "defaults", "missed", "coupon", "arrears"},
    {"bankruptcy", "chapter 11", "insolvency", "liquidation", "receivership"},
    {"launches", "product", "index", "webinar", "unveils"},
}};

constexpr std::array<std::string_view, 20> kCompanyHeads = {
    "Norvex",    "Altura", "Brightwell", "Castor",   "Delmont", "Everly",  "Fairhaven",
    "Granite",   "Halcyon", "Ironvale",  "Juniper",  "Kestrel", "Lumen",   "Meridian",
    "Northgate", "Orion",  "Pinecrest",  "Quillon",  "Redwood", "Sterling"};

constexpr std::array<std::string_view, 8> kCompanyTails = {"Holdings", "Corp",       "Energy", "Capital",
                                                           "Systems",  "Industries", "Labs",   "Motors"};

constexpr std::array<std::string_view, 6> kConnectors = {"announces", "confirms", "plans",
                                                        "completes", "outlines", "details"};

constexpr std::array<std::string_view, 14> kFiller = {
    "today",  "shares", "quarter", "market", "investors", "board", "statement",
    "update", "deal",   "sector",  "week",   "officials", "analysts", "region"};

template <typename T, std::size_t N>
std::string_view pick(Rng& rng, const std::array<T, N>& items) {
  return items[rng.index(N)];
}

}  // namespace

std::span<const std::string_view> lexicon(Category c) noexcept { return kLexicons[index_of(c)]; }

std::vector<std::string_view> event_keywords() {
  std::vector<std::string_view> out;
  for (const auto& lex : kLexicons) out.insert(out.end(), lex.begin(), lex.end());
  return out;
}

std::vector<LabeledRecord> generate_synthetic_corpus(const ClassCounts& counts, std::uint64_t seed,
                                                     const SyntheticOptions& options) {
  Rng rng(seed);
  std::vector<LabeledRecord> out;
  std::size_t serial = 0;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    const auto& lex = kLexicons[c];
    for (std::size_t n = 0; n < counts[c]; ++n, ++serial) {
      const std::string company =
          std::string(pick(rng, kCompanyHeads)) + " " + std::string(pick(rng, kCompanyTails));
      const std::string_view kw1 = pick(rng, lex);
      const std::string_view kw2 = pick(rng, lex);

      LabeledRecord lr;
      NewsRecord& r = lr.record;
      r.id = options.id_prefix + "-" + std::to_string(seed) + "-" + std::to_string(serial);
      r.title = company + " " + std::string(pick(rng, kConnectors)) + " " + std::string(kw1) + " " +
                std::string(pick(rng, kFiller)) + " " + std::string(pick(rng, kFiller));
      r.snippet = "The " + std::string(pick(rng, kFiller)) + " " + std::string(pick(rng, kFiller)) + " " +
                  std::string(kw2) + " " + std::string(pick(rng, kFiller)) + ".";
      if (options.distractor_rate > 0.0 && rng.uniform() < options.distractor_rate) {
        std::size_t other = static_cast<std::size_t>(rng.index(kNumCategories - 1));
        if (other >= c) ++other;
        r.snippet += " Analysts also cited " + std::string(pick(rng, kLexicons[other])) + ".";
      }
      r.source = "synthetic";
      char stamp[32];
      std::snprintf(stamp, sizeof stamp, "2024-%02zu-%02zuT%02zu:%02zu:00Z", 1 + serial % 12, 1 + serial % 28,
                    serial % 24, serial % 60);
      r.published_at = stamp;
      lr.label = category_at(c);
      lr.provenance = Provenance::gold();
      out.push_back(std::move(lr));
    }
  }
  rng.shuffle(std::span<LabeledRecord>(out));
  return out;
}

}  // namespace fanal
