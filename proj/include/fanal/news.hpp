// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fanal/category.hpp"

namespace fanal {

struct NewsRecord {
  std::string id;
  std::string title;
  std::string snippet;
  std::optional<std::string> body;
  std::string source;
  std::string published_at;  // ISO-8601, validated on parse

  /// Title and snippet joined by a space; the body stands in for an empty snippet.
  std::string text() const;

  bool operator==(const NewsRecord&) const = default;
};

/// Where a label came from. Gold labels carry no confidence; silver and
/// predicted labels carry one in (0, 1].
class Provenance {
 public:
  enum class Kind { Gold, Silver, Predicted };

  static Provenance gold() { return Provenance(Kind::Gold, std::nullopt); }
  static Provenance silver(double confidence);
  static Provenance predicted(double confidence);

  Kind kind() const noexcept { return kind_; }
  std::optional<double> confidence() const noexcept { return confidence_; }

  bool operator==(const Provenance&) const = default;

 private:
  Provenance(Kind kind, std::optional<double> confidence) : kind_(kind), confidence_(confidence) {}

  Kind kind_;
  std::optional<double> confidence_;
};

std::string_view to_string(Provenance::Kind kind) noexcept;

struct LabeledRecord {
  NewsRecord record;
  Category label = Category::Other;
  Provenance provenance = Provenance::gold();

  bool operator==(const LabeledRecord&) const = default;
};

/// True for YYYY-MM-DDTHH:MM:SS with optional fractional seconds and a
/// zone designator (Z or +HH:MM / -HH:MM).
bool is_iso8601(std::string_view s) noexcept;

struct DuplicateId {
  std::string id;
  std::size_t line = 0;  // 1-based line of the dropped duplicate
};

template <typename T>
struct ParseResult {
  std::vector<T> records;
  std::vector<DuplicateId> duplicates;
};

/// Parses one JSON object into a record. `line` is used in error messages.
/// Throws DataError.
NewsRecord news_from_json(const nlohmann::json& j, std::size_t line);
LabeledRecord labeled_from_json(const nlohmann::json& j, std::size_t line);

nlohmann::json to_json(const NewsRecord& r);
nlohmann::json to_json(const LabeledRecord& r);

/// Reads one record per non-blank line. Later records with an id already
/// seen are dropped and reported in `duplicates`.
ParseResult<NewsRecord> parse_jsonl(std::istream& in);
ParseResult<LabeledRecord> parse_labeled_jsonl(std::istream& in);

/// Convenience wrappers that open `path`; throw DataError when it cannot be read.
ParseResult<NewsRecord> read_jsonl_file(const std::string& path);
ParseResult<LabeledRecord> read_labeled_jsonl_file(const std::string& path);

void write_jsonl(std::ostream& out, const std::vector<NewsRecord>& records);
void write_jsonl(std::ostream& out, const std::vector<LabeledRecord>& records);

}  // namespace fanal
