// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/chat.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <fstream>
#include <set>
#include <sstream>

#include "fanal/error.hpp"
#include "fanal/prompt.hpp"
#include "fanal/random.hpp"
#include "fanal/text.hpp"

namespace fanal {
namespace {

constexpr std::string_view kNoAnswer = "I cannot determine this.";

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "the", "and", "for", "its", "with", "from", "into", "that", "this", "are", "was", "were", "has", "have",
      "after", "over", "such", "other", "all", "any", "some", "not", "new", "two", "one", "first", "their",
      "through", "usually", "typically", "which", "when", "than", "rather", "part", "form", "made", "make",
      "makes", "may", "can", "could", "will", "who", "what", "out", "off", "also", "ahead", "broad", "via",
      // Generic business vocabulary that shows up in news about any event.
      "market", "share", "company", "companie", "investor", "board", "deal", "statement", "sector", "quarter",
      "update", "today", "week", "official", "analyst", "region", "energy", "capital", "corp", "holding",
      "business", "firm", "public"};
  return words;
}

std::string stem(std::string t) {
  if (t.size() > 3 && t.back() == 's' && t[t.size() - 2] != 's') t.pop_back();
  return t;
}

std::vector<std::string> cue_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& tok : tokenize(text)) {
    if (tok.text.size() < 2) continue;
    auto t = stem(tok.text);
    if (stopwords().count(tok.text) || stopwords().count(t)) continue;
    out.push_back(std::move(t));
  }
  return out;
}

// Cue word to weight, per category. A definition word alone is weak evidence;
// a name word or an example word is strong.
using CueSets = std::array<std::map<std::string, int>, kNumCategories>;

// Collects category cue words from the instruction part of a prompt.
CueSets learn_cues(std::string_view instructions) {
  CueSets cues;
  const auto add = [&](Category c, std::string_view text, int weight = 1) {
    for (auto& t : cue_tokens(text)) {
      int& w = cues[index_of(c)][std::move(t)];
      w = std::max(w, weight);
    }
  };
  std::istringstream in{std::string(instructions)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("Categories: ", 0) == 0) {
      std::string list = line.substr(12);
      if (!list.empty() && list.back() == '.') list.pop_back();
      std::size_t pos = 0;
      while (pos <= list.size()) {
        const auto comma = list.find(", ", pos);
        const auto name = list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (auto c = category_from_name(trim(name))) add(*c, name, 2);
        if (comma == std::string::npos) break;
        pos = comma + 2;
      }
    } else if (line.rfind("- ", 0) == 0) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      if (auto c = category_from_name(line.substr(2, colon - 2))) add(*c, line.substr(colon + 2));
    } else if (line.rfind("{", 0) == 0) {
      if (line.back() == ',') line.pop_back();
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) continue;
      const auto c = category_from_name(j.value("category", std::string{}));
      if (c) add(*c, j.value("sentence", std::string{}), 2);
    }
  }
  // A cue claimed by several categories carries no signal.
  std::map<std::string, int> owners;
  for (const auto& s : cues) {
    for (const auto& [t, w] : s) ++owners[t];
  }
  for (auto& s : cues) {
    for (auto it = s.begin(); it != s.end();) it = owners[it->first] > 1 ? s.erase(it) : std::next(it);
  }
  return cues;
}

}  // namespace

nlohmann::json to_json(const TranscriptEntry& e) {
  nlohmann::ordered_json j = {{"record_id", e.record_id},
                              {"prompt", e.prompt},
                              {"response", e.response},
                              {"parsed", e.parsed},
                              {"latency_ms", e.latency_ms}};
  return nlohmann::json::parse(j.dump());
}

TranscriptEntry transcript_entry_from_json(const nlohmann::json& j) {
  try {
    TranscriptEntry e;
    e.record_id = j.at("record_id").get<std::string>();
    e.prompt = j.at("prompt").get<std::string>();
    e.response = j.at("response").get<std::string>();
    e.parsed = j.at("parsed").get<std::string>();
    e.latency_ms = j.at("latency_ms").get<double>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("transcript: ") + ex.what());
  }
}

std::vector<TranscriptEntry> read_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open transcript " + path);
  std::vector<TranscriptEntry> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError(path + ": malformed JSON at line " + std::to_string(n));
    out.push_back(transcript_entry_from_json(j));
  }
  return out;
}

void write_transcript(const std::string& path, const std::vector<TranscriptEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write transcript " + path);
  for (const auto& e : entries) {
    // Keep the documented field order on disk.
    nlohmann::ordered_json j = {{"record_id", e.record_id},
                                {"prompt", e.prompt},
                                {"response", e.response},
                                {"parsed", e.parsed},
                                {"latency_ms", e.latency_ms}};
    out << j.dump() << '\n';
  }
}

KeywordStubClient::KeywordStubClient(std::uint64_t seed, double noise_rate) : seed_(seed), noise_rate_(noise_rate) {
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw ConfigError("stub noise_rate must be in [0, 1]");
}

std::string KeywordStubClient::send(const std::string& prompt, const ChatParams&) {
  if (noise_rate_ > 0.0) {
    const double u = static_cast<double>(derive_seed(seed_, prompt) >> 11) * 0x1.0p-53;
    if (u < noise_rate_) return "xyzzy";
  }
  const auto sentence = target_sentence(prompt);
  if (!sentence) return std::string(kNoAnswer);
  const auto cut = prompt.rfind("\nSentence:\n");
  const CueSets cues = learn_cues(std::string_view(prompt).substr(0, cut));

  std::array<int, kNumCategories> score{};
  for (const auto& t : cue_tokens(*sentence)) {
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      if (const auto it = cues[k].find(t); it != cues[k].end()) score[k] += it->second;
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumCategories; ++k) {
    if (score[k] > score[best]) best = k;
  }
  const auto top = std::count(score.begin(), score.end(), score[best]);
  if (score[best] == 0 || top > 1) return std::string(kNoAnswer);
  return std::string(display_name(category_at(best)));
}

std::string LookupClient::send(const std::string& prompt, const ChatParams&) {
  const auto sentence = target_sentence(prompt);
  if (!sentence) return fallback_;
  const auto it = table_.find(*sentence);
  return it == table_.end() ? fallback_ : it->second;
}

ReplayClient::ReplayClient(const std::vector<TranscriptEntry>& transcript) {
  for (const auto& e : transcript) table_.emplace(e.prompt, std::make_pair(e.response, e.latency_ms));
}

ReplayClient ReplayClient::from_file(const std::string& path) { return ReplayClient(read_transcript(path)); }

std::string ReplayClient::send(const std::string& prompt, const ChatParams&) {
  const auto it = table_.find(prompt);
  if (it == table_.end()) throw DataError("replay: no recorded response for this prompt");
  return it->second.first;
}

double ReplayClient::recorded_latency(const std::string& prompt) const {
  const auto it = table_.find(prompt);
  return it == table_.end() ? 0.0 : it->second.second;
}

}  // namespace fanal
