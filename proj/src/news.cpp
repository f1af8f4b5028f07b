// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/news.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "fanal/error.hpp"
#include "fanal/text.hpp"

namespace fanal {
namespace {

using nlohmann::json;

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

std::string required_string(const json& j, const char* field, std::size_t line) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) {
    throw DataError(std::string("missing field ") + field + at_line(line));
  }
  if (!it->is_string()) throw DataError(std::string("field ") + field + " is not a string" + at_line(line));
  return it->get<std::string>();
}

std::string optional_string(const json& j, const char* field, std::size_t line) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw DataError(std::string("field ") + field + " is not a string" + at_line(line));
  return it->get<std::string>();
}

bool digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return false;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

int number(std::string_view s, std::size_t pos, std::size_t n) {
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

template <typename T, typename Fn>
ParseResult<T> parse_lines(std::istream& in, Fn&& from_json) {
  ParseResult<T> result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) throw DataError("malformed JSON" + at_line(line_no));
    T rec = from_json(j, line_no);
    const std::string& id = [&]() -> const std::string& {
      if constexpr (std::is_same_v<T, NewsRecord>) {
        return rec.id;
      } else {
        return rec.record.id;
      }
    }();
    if (!seen.insert(id).second) {
      result.duplicates.push_back({id, line_no});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace

std::string NewsRecord::text() const {
  const std::string& second = (snippet.empty() && body) ? *body : snippet;
  if (second.empty()) return title;
  return title + " " + second;
}

Provenance Provenance::silver(double confidence) {
  if (!(confidence > 0.0 && confidence <= 1.0)) throw DataError("silver confidence must be in (0, 1]");
  return Provenance(Kind::Silver, confidence);
}

Provenance Provenance::predicted(double confidence) {
  if (!(confidence > 0.0 && confidence <= 1.0)) throw DataError("predicted confidence must be in (0, 1]");
  return Provenance(Kind::Predicted, confidence);
}

std::string_view to_string(Provenance::Kind kind) noexcept {
  switch (kind) {
    case Provenance::Kind::Gold:
      return "gold";
    case Provenance::Kind::Silver:
      return "silver";
    case Provenance::Kind::Predicted:
      return "predicted";
  }
  return "gold";
}

bool is_iso8601(std::string_view s) noexcept {
  // YYYY-MM-DDTHH:MM:SS
  if (!digits(s, 0, 4) || s.size() < 19 || s[4] != '-' || !digits(s, 5, 2) || s[7] != '-' ||
      !digits(s, 8, 2) || (s[10] != 'T' && s[10] != 't') || !digits(s, 11, 2) || s[13] != ':' ||
      !digits(s, 14, 2) || s[16] != ':' || !digits(s, 17, 2)) {
    return false;
  }
  const int month = number(s, 5, 2), day = number(s, 8, 2);
  const int hour = number(s, 11, 2), minute = number(s, 14, 2), second = number(s, 17, 2);
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
    return false;
  }
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) return false;
  }
  if (pos == s.size()) return false;  // zone designator required
  if (s[pos] == 'Z' || s[pos] == 'z') return pos + 1 == s.size();
  if (s[pos] != '+' && s[pos] != '-') return false;
  if (!digits(s, pos + 1, 2) || pos + 6 != s.size() || s[pos + 3] != ':' || !digits(s, pos + 4, 2)) {
    return false;
  }
  return number(s, pos + 1, 2) <= 23 && number(s, pos + 4, 2) <= 59;
}

NewsRecord news_from_json(const json& j, std::size_t line) {
  NewsRecord r;
  r.id = required_string(j, "id", line);
  r.title = required_string(j, "title", line);
  if (r.id.empty()) throw DataError("empty field id" + at_line(line));
  if (trim(r.title).empty()) throw DataError("empty field title" + at_line(line));
  r.snippet = optional_string(j, "snippet", line);
  if (auto it = j.find("body"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError("field body is not a string" + at_line(line));
    r.body = it->get<std::string>();
  }
  r.source = optional_string(j, "source", line);
  r.published_at = required_string(j, "published_at", line);
  if (!is_iso8601(r.published_at)) throw DataError("invalid published_at" + at_line(line));
  return r;
}

LabeledRecord labeled_from_json(const json& j, std::size_t line) {
  LabeledRecord lr;
  lr.record = news_from_json(j, line);
  const std::string label = required_string(j, "label", line);
  const auto cat = category_from_name(label);
  if (!cat) throw DataError("unknown label '" + label + "'" + at_line(line));
  lr.label = *cat;

  const std::string prov = optional_string(j, "provenance", line);
  std::optional<double> confidence;
  if (auto it = j.find("confidence"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw DataError("field confidence is not a number" + at_line(line));
    confidence = it->get<double>();
  }
  if (prov.empty() || prov == "gold") {
    if (confidence) throw DataError("gold record carries a confidence" + at_line(line));
    lr.provenance = Provenance::gold();
  } else if (prov == "silver" || prov == "predicted") {
    if (!confidence) throw DataError("missing field confidence" + at_line(line));
    try {
      lr.provenance = prov == "silver" ? Provenance::silver(*confidence) : Provenance::predicted(*confidence);
    } catch (const DataError& e) {
      throw DataError(e.what() + at_line(line));
    }
  } else {
    throw DataError("unknown provenance '" + prov + "'" + at_line(line));
  }
  return lr;
}

json to_json(const NewsRecord& r) {
  json j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["snippet"] = r.snippet;
  if (r.body) j["body"] = *r.body;
  j["source"] = r.source;
  j["published_at"] = r.published_at;
  return j;
}

json to_json(const LabeledRecord& r) {
  json j = to_json(r.record);
  j["label"] = std::string(code_name(r.label));
  j["provenance"] = std::string(to_string(r.provenance.kind()));
  if (auto c = r.provenance.confidence()) {
    j["confidence"] = *c;
  } else {
    j["confidence"] = nullptr;
  }
  return j;
}

ParseResult<NewsRecord> parse_jsonl(std::istream& in) {
  return parse_lines<NewsRecord>(in, news_from_json);
}

ParseResult<LabeledRecord> parse_labeled_jsonl(std::istream& in) {
  return parse_lines<LabeledRecord>(in, labeled_from_json);
}

ParseResult<NewsRecord> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return parse_jsonl(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

ParseResult<LabeledRecord> read_labeled_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return parse_labeled_jsonl(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_jsonl(std::ostream& out, const std::vector<NewsRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_jsonl(std::ostream& out, const std::vector<LabeledRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

}  // namespace fanal
