// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include "fanal/chat.hpp"
#include "fanal/error.hpp"

namespace fanal {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("bench.url must start with http:// or https://");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("bench.url must start with http:// or https://");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpChatClient::HttpChatClient(HttpClientConfig config) : config_(std::move(config)) {
  split_url(config_.url);
  if (config_.model.empty()) throw ConfigError("bench.model is required for the http client");
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("missing credentials: environment variable " + config_.api_key_env + " is not set");
  }
  api_key_ = key;
}

std::string HttpChatClient::send(const std::string& prompt, const ChatParams& params) {
  const auto ep = split_url(config_.url);
  httplib::Client cli(ep.origin);
  const auto secs = params.timeout_ms / 1000;
  const auto usecs = (params.timeout_ms % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);

  const nlohmann::json body = {{"model", config_.model},
                               {"messages", {{{"role", "user"}, {"content", prompt}}}},
                               {"temperature", params.temperature},
                               {"max_tokens", params.max_tokens}};
  const httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
  auto res = cli.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) throw TransientClientError("http: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransientClientError("http: status " + std::to_string(res->status));
  }
  if (res->status != 200) throw ClientUnavailable("http: status " + std::to_string(res->status));
  const auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw TransientClientError("http: response is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw TransientClientError("http: unexpected response shape");
  }
}

}  // namespace fanal
