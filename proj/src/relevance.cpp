// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/relevance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "fanal/error.hpp"
#include "fanal/random.hpp"
#include "fanal/synthetic.hpp"
#include "fanal/text.hpp"

namespace fanal {
namespace {

constexpr std::size_t kWindow = 3;
constexpr double kDistanceCap = 10.0;

struct Span {
  std::size_t first = 0;  // token index range [first, last)
  std::size_t last = 0;
};

const std::vector<std::vector<std::string>>& keyword_patterns() {
  static const auto patterns = [] {
    std::vector<std::vector<std::string>> out;
    for (auto kw : event_keywords()) {
      std::vector<std::string> words;
      for (const auto& t : tokenize(kw)) words.push_back(t.text);
      if (!words.empty()) out.push_back(std::move(words));
    }
    return out;
  }();
  return patterns;
}

std::vector<Span> keyword_spans(const std::vector<Token>& tokens) {
  std::vector<Span> out;
  for (std::size_t p = 0; p < tokens.size(); ++p) {
    for (const auto& pat : keyword_patterns()) {
      if (p + pat.size() > tokens.size()) continue;
      bool hit = true;
      for (std::size_t k = 0; k < pat.size() && hit; ++k) hit = tokens[p + k].text == pat[k];
      if (hit) out.push_back({p, p + pat.size()});
    }
  }
  return out;
}

bool is_reporting(const std::vector<Token>& tokens, std::size_t i) {
  static const std::array<std::string_view, 8> verbs = {"says",     "said",  "reports", "reported",
                                                        "notes",    "noted", "told",    "comments"};
  const auto& w = tokens[i].text;
  if (std::find(verbs.begin(), verbs.end(), w) != verbs.end()) return true;
  return w == "according" && i + 1 < tokens.size() && tokens[i + 1].text == "to";
}

std::size_t count_occurrences(std::string_view text, std::string_view surface) {
  const std::string hay = to_lower_ascii(text), needle = to_lower_ascii(surface);
  if (needle.empty()) return 0;
  const auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    const bool left = pos == 0 || !word(hay[pos - 1]);
    const bool right = pos + needle.size() == hay.size() || !word(hay[pos + needle.size()]);
    n += left && right;
  }
  return n;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

void validate_mention(std::string_view text, const EntityMention& m) {
  if (m.start >= m.end || m.end > text.size()) {
    throw DataError("mention '" + m.surface + "' in " + m.record_id + ": span [" + std::to_string(m.start) + ", " +
                    std::to_string(m.end) + ") out of bounds for text of length " + std::to_string(text.size()));
  }
  if (text.substr(m.start, m.end - m.start) != m.surface) {
    throw DataError("mention '" + m.surface + "' in " + m.record_id + ": span does not match surface text");
  }
}

std::string_view feature_name(RelevanceFeature f) noexcept {
  switch (f) {
    case RelevanceFeature::Position:
      return "position";
    case RelevanceFeature::KeywordDistance:
      return "keyword_distance";
    case RelevanceFeature::ReportingVerb:
      return "reporting_verb";
    case RelevanceFeature::PrecededByKeyword:
      return "preceded_by_keyword";
    case RelevanceFeature::MentionCount:
      return "mention_count";
    case RelevanceFeature::SentenceInitial:
      return "sentence_initial";
  }
  return "";
}

RelevanceFeatures phi(const NewsRecord& record, const EntityMention& mention) {
  const std::string text = record.text();
  validate_mention(text, mention);
  const auto tokens = tokenize(text);

  Span m{tokens.size(), tokens.size()};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].end <= mention.start) continue;
    if (m.first == tokens.size()) m.first = m.last = i;
    if (tokens[i].begin < mention.end) m.last = i + 1;
  }

  double distance = kDistanceCap;
  bool preceded = false;
  for (const auto& kw : keyword_spans(tokens)) {
    if (kw.last <= m.first) {
      distance = std::min(distance, static_cast<double>(m.first - kw.last + 1));
      preceded = preceded || m.first - kw.last < kWindow;
    } else if (kw.first >= m.last) {
      distance = std::min(distance, static_cast<double>(kw.first - m.last + 1));
    }
  }

  bool reporting = false;
  for (std::size_t i = m.last; i < std::min(tokens.size(), m.last + kWindow); ++i) {
    reporting = reporting || is_reporting(tokens, i);
  }

  const auto before = trim(std::string_view(text).substr(0, mention.start));
  const bool initial = before.empty() || before.back() == '.' || before.back() == '!' || before.back() == '?';

  RelevanceFeatures f{};
  f[0] = text.empty() ? 0.0 : static_cast<double>(mention.start) / static_cast<double>(text.size());
  f[1] = std::min(distance, kDistanceCap) / kDistanceCap;
  f[2] = reporting ? 1.0 : 0.0;
  f[3] = preceded ? 1.0 : 0.0;
  f[4] = static_cast<double>(count_occurrences(text, mention.surface));
  f[5] = initial ? 1.0 : 0.0;
  return f;
}

double relevance_score(const RelevanceModel& model, std::span<const double> features) {
  if (model.feature_version != kRelevanceFeatureVersion) {
    throw DataError("relevance model uses feature map v" + std::to_string(model.feature_version) + ", expected v" +
                    std::to_string(kRelevanceFeatureVersion));
  }
  if (model.W.size() != features.size()) {
    throw DataError("relevance: weight dimension " + std::to_string(model.W.size()) + " != feature dimension " +
                    std::to_string(features.size()));
  }
  double z = model.b;
  for (std::size_t i = 0; i < features.size(); ++i) z += model.W[i] * features[i];
  return sigmoid(z);
}

bool is_relevant(const RelevanceModel& model, std::span<const double> features, double threshold) {
  return relevance_score(model, features) >= threshold;
}

double relevance_loss(const RelevanceModel& model, std::span<const RelevanceExample> data, std::vector<double>* grad) {
  if (data.empty()) throw DataError("relevance: empty training set");
  const std::size_t d = model.W.size();
  if (grad) grad->assign(d + 1, 0.0);
  double loss = 0.0;
  for (const auto& ex : data) {
    if (ex.x.size() != d) throw DataError("relevance: feature dimension mismatch");
    double z = model.b;
    for (std::size_t i = 0; i < d; ++i) z += model.W[i] * ex.x[i];
    loss += ex.relevant ? softplus(-z) : softplus(z);
    if (grad) {
      const double r = sigmoid(z) - (ex.relevant ? 1.0 : 0.0);
      for (std::size_t i = 0; i < d; ++i) (*grad)[i] += r * ex.x[i];
      (*grad)[d] += r;
    }
  }
  const double n = static_cast<double>(data.size());
  if (grad) {
    for (auto& g : *grad) g /= n;
  }
  return loss / n;
}

RelevanceFit train_relevance(std::span<const RelevanceExample> data, const RelevanceTrainConfig& cfg) {
  if (!(cfg.lr > 0.0) || cfg.epochs < 0) throw ConfigError("relevance: lr must be positive and epochs non-negative");
  const auto positives = std::count_if(data.begin(), data.end(), [](const auto& e) { return e.relevant; });
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(data.size())) {
    throw DataError("relevance: training data must contain both relevant and irrelevant mentions");
  }
  RelevanceFit fit;
  Rng rng(derive_seed(cfg.seed, "relevance.init"));
  for (auto& w : fit.model.W) w = 0.01 * rng.gaussian();

  std::vector<double> grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = relevance_loss(fit.model, data, &grad);
    if (!std::isfinite(loss)) throw DivergenceError("relevance: loss is not finite at epoch " + std::to_string(epoch));
    fit.losses.push_back(loss);
    for (std::size_t i = 0; i < fit.model.W.size(); ++i) fit.model.W[i] -= cfg.lr * grad[i];
    fit.model.b -= cfg.lr * grad.back();
  }
  fit.losses.push_back(relevance_loss(fit.model, data));
  if (!std::isfinite(fit.losses.back())) throw DivergenceError("relevance: loss is not finite after training");
  return fit;
}

nlohmann::json to_json(const RelevanceModel& model) {
  return {{"format", "fanal.relevance"}, {"feature_version", model.feature_version}, {"W", model.W}, {"b", model.b}};
}

RelevanceModel relevance_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "fanal.relevance") throw FormatError("not a relevance model");
    RelevanceModel m;
    m.feature_version = j.at("feature_version").get<int>();
    m.W = j.at("W").get<std::vector<double>>();
    m.b = j.at("b").get<double>();
    if (m.feature_version != kRelevanceFeatureVersion || m.W.size() != kRelevanceFeatureDim) {
      throw FormatError("relevance model has an unsupported feature map");
    }
    for (double w : m.W) {
      if (!std::isfinite(w)) throw FormatError("relevance model has non-finite weights");
    }
    if (!std::isfinite(m.b)) throw FormatError("relevance model has a non-finite bias");
    return m;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("relevance model: ") + ex.what());
  }
}

nlohmann::json to_json(const EntityMention& m) {
  nlohmann::json j = {{"record_id", m.record_id}, {"surface", m.surface}, {"start", m.start}, {"end", m.end}};
  if (m.relevant) j["relevant"] = *m.relevant;
  return j;
}

EntityMention mention_from_json(const nlohmann::json& j, std::size_t line) {
  try {
    EntityMention m;
    m.record_id = j.at("record_id").get<std::string>();
    m.surface = j.at("surface").get<std::string>();
    m.start = j.at("start").get<std::size_t>();
    m.end = j.at("end").get<std::size_t>();
    if (j.contains("relevant") && !j["relevant"].is_null()) m.relevant = j["relevant"].get<bool>();
    return m;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError("mentions line " + std::to_string(line) + ": " + ex.what());
  }
}

std::vector<EntityMention> read_mentions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mentions file " + path);
  std::vector<EntityMention> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError(path + ": malformed JSON at line " + std::to_string(n));
    out.push_back(mention_from_json(j, n));
  }
  return out;
}

void write_mentions(const std::string& path, const std::vector<EntityMention>& mentions) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write mentions file " + path);
  for (const auto& m : mentions) out << to_json(m).dump() << '\n';
}

std::vector<RelevanceSample> generate_relevance_fixture(std::size_t n, std::uint64_t seed) {
  static constexpr std::array<std::string_view, 10> heads = {"Norvex", "Altura",  "Brightwell", "Castor", "Delmont",
                                                             "Everly", "Halcyon", "Kestrel",    "Orion",  "Quillon"};
  static constexpr std::array<std::string_view, 5> tails = {"Holdings", "Capital", "Research", "Partners", "Group"};
  static constexpr std::array<std::string_view, 4> moves = {"soared", "slowed", "picked up", "dominated"};
  static constexpr std::array<std::string_view, 4> places = {"the sector", "Europe", "the quarter", "regional markets"};
  static constexpr std::array<std::string_view, 3> verbs = {"says", "reported", "noted"};

  Rng rng(derive_seed(seed, "relevance.fixture"));
  const auto pick = [&](const auto& arr) { return std::string(arr[rng.index(arr.size())]); };
  const auto keyword = [&] {
    const auto c = category_at(rng.index(kNumCategories - 1));
    const auto lex = lexicon(c);
    return std::string(lex[rng.index(lex.size())]);
  };
  const auto capitalized = [](std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
  };

  std::vector<RelevanceSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string company = pick(heads) + " " + pick(tails);
    const std::string kw = keyword();
    const bool subject = i % 2 == 0;
    std::string text;
    std::size_t start = 0;
    switch (rng.index(3)) {
      case 0:
        if (subject) {
          text = company + " confirms " + kw + " plans for " + pick(places) + ".";
        } else {
          text = capitalized(kw) + " activity " + pick(moves) + " across " + pick(places) + ", ";
          start = text.size();
          text += company + " " + pick(verbs) + ".";
        }
        break;
      case 1:
        if (subject) {
          text = "Shareholders back the " + kw + " at ";
          start = text.size();
          text += company + " this week.";
        } else {
          text = company + " " + pick(verbs) + " that " + kw + " deals " + pick(moves) + " in " + pick(places) + ".";
        }
        break;
      default:
        if (subject) {
          text = company + " " + kw + " talks advance, officials said.";
        } else {
          text = "Investors weighed " + kw + " news as ";
          start = text.size();
          text += company + " noted " + pick(moves) + " volumes.";
        }
        break;
    }
    RelevanceSample s;
    s.record.id = "rel-" + std::to_string(i);
    s.record.title = text;
    s.record.source = "fixture";
    s.record.published_at = "2024-01-01T00:00:00Z";
    s.mention = {s.record.id, company, start, start + company.size(), subject};
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<RelevanceExample> featurize_mentions(std::span<const RelevanceSample> samples) {
  std::vector<RelevanceExample> out;
  for (const auto& s : samples) {
    if (!s.mention.relevant) continue;
    out.push_back({phi(s.record, s.mention), *s.mention.relevant});
  }
  return out;
}

}  // namespace fanal
