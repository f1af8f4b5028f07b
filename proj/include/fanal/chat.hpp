// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fanal/category.hpp"

namespace fanal {

struct ChatParams {
  double temperature = 0.0;
  int max_tokens = 16;
  int timeout_ms = 30000;
};

/// Worth retrying: timeouts, rate limits, 5xx.
class TransientClientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Not worth retrying: bad credentials, unknown endpoint.
class ClientUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Implementations must be safe to call from several threads at once.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string send(const std::string& prompt, const ChatParams& params) = 0;
  virtual std::string id() const = 0;
};

/// One line of a benchmark transcript.
struct TranscriptEntry {
  std::string record_id;
  std::string prompt;
  std::string response;
  std::string parsed;  // display name or "Unparseable"
  double latency_ms = 0.0;

  bool operator==(const TranscriptEntry&) const = default;
};

nlohmann::json to_json(const TranscriptEntry& e);
TranscriptEntry transcript_entry_from_json(const nlohmann::json& j);
/// Throws DataError if the file is missing or malformed.
std::vector<TranscriptEntry> read_transcript(const std::string& path);
void write_transcript(const std::string& path, const std::vector<TranscriptEntry>& entries);

/// Deterministic offline responder. It learns cue words for each category
/// from the prompt it is given (category names, then any definitions and
/// examples), drops cues shared by several categories, and answers with the
/// category whose cues overlap the target sentence most. More in-prompt
/// information therefore means better answers. With noise_rate > 0, a
/// seeded fraction of prompts gets a nonsense reply.
class KeywordStubClient : public ChatClient {
 public:
  explicit KeywordStubClient(std::uint64_t seed = 0, double noise_rate = 0.0);
  std::string send(const std::string& prompt, const ChatParams& params) override;
  std::string id() const override { return "stub"; }

 private:
  std::uint64_t seed_;
  double noise_rate_;
};

/// Always gives the same answer.
class FixedResponseClient : public ChatClient {
 public:
  explicit FixedResponseClient(std::string response) : response_(std::move(response)) {}
  std::string send(const std::string&, const ChatParams&) override { return response_; }
  std::string id() const override { return "fixed"; }

 private:
  std::string response_;
};

/// Answers by target sentence, with a fallback for unknown sentences.
class LookupClient : public ChatClient {
 public:
  LookupClient(std::unordered_map<std::string, std::string> by_sentence, std::string fallback)
      : table_(std::move(by_sentence)), fallback_(std::move(fallback)) {}
  std::string send(const std::string& prompt, const ChatParams& params) override;
  std::string id() const override { return "lookup"; }

 private:
  std::unordered_map<std::string, std::string> table_;
  std::string fallback_;
};

/// Serves recorded responses keyed by the exact prompt. A prompt that was
/// never recorded raises DataError.
class ReplayClient : public ChatClient {
 public:
  explicit ReplayClient(const std::vector<TranscriptEntry>& transcript);
  static ReplayClient from_file(const std::string& path);

  std::string send(const std::string& prompt, const ChatParams& params) override;
  std::string id() const override { return "replay"; }
  double recorded_latency(const std::string& prompt) const;

 private:
  std::unordered_map<std::string, std::pair<std::string, double>> table_;
};

struct HttpClientConfig {
  std::string url;  // full chat-completions endpoint, http:// or https://
  std::string model;
  std::string api_key_env = "FANAL_API_KEY";
};

/// Minimal JSON chat-completion adapter: POSTs {model, messages,
/// temperature, max_tokens} and reads choices[0].message.content. The key
/// comes from the environment and is sent as a bearer token. Throws
/// ConfigError at construction when the variable is unset.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpClientConfig config);
  std::string send(const std::string& prompt, const ChatParams& params) override;
  std::string id() const override { return "http:" + config_.model; }

 private:
  HttpClientConfig config_;
  std::string api_key_;
};

}  // namespace fanal
