// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#include "fanal/config.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "fanal/error.hpp"
#include "fanal/text.hpp"

namespace fanal {
namespace {

std::string kind_name(ConfigValue::Kind k) {
  switch (k) {
    case ConfigValue::Kind::Bool:
      return "a boolean";
    case ConfigValue::Kind::Int:
      return "an integer";
    case ConfigValue::Kind::Float:
      return "a number";
    case ConfigValue::Kind::String:
      return "a string";
    case ConfigValue::Kind::Array:
      return "an array";
  }
  return "a value";
}

bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

class LineParser {
 public:
  LineParser(std::string_view line, const std::string& where) : s_(line), where_(where) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string dotted_key() {
    std::string key;
    while (true) {
      skip_ws();
      const std::size_t b = pos_;
      while (pos_ < s_.size() && bare_key_char(s_[pos_])) ++pos_;
      if (b == pos_) fail("expected a key");
      key.append(s_.substr(b, pos_ - b));
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '.') {
        ++pos_;
        key += '.';
        continue;
      }
      return key;
    }
  }

  ConfigValue value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return string_value();
    if (c == '\'') {
      const auto close = s_.find('\'', pos_ + 1);
      if (close == std::string_view::npos) fail("unterminated string");
      ConfigValue v = config_string(std::string(s_.substr(pos_ + 1, close - pos_ - 1)));
      pos_ = close + 1;
      return v;
    }
    if (c == '[') {
      ++pos_;
      ConfigValue v;
      v.kind = ConfigValue::Kind::Array;
      while (!consume(']')) {
        if (pos_ >= s_.size()) fail("unterminated array");
        v.items.push_back(value());
        if (v.items.back().kind == ConfigValue::Kind::Array) fail("nested arrays are not supported");
        if (!consume(',')) {
          if (!consume(']')) fail("expected ',' or ']' in array");
          break;
        }
      }
      return v;
    }
    const std::size_t b = pos_;
    while (pos_ < s_.size() && (bare_key_char(s_[pos_]) || s_[pos_] == '.' || s_[pos_] == '+')) ++pos_;
    const std::string tok(s_.substr(b, pos_ - b));
    if (tok == "true" || tok == "false") {
      ConfigValue v;
      v.kind = ConfigValue::Kind::Bool;
      v.b = tok == "true";
      return v;
    }
    return number(tok);
  }

 private:
  ConfigValue string_value() {
    std::string out;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char ch = s_[pos_++];
      if (ch == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        const char e = s_[pos_++];
        switch (e) {
          case 'n':
            ch = '\n';
            break;
          case 't':
            ch = '\t';
            break;
          case '"':
          case '\\':
            ch = e;
            break;
          default:
            fail(std::string("unsupported escape \\") + e);
        }
      }
      out += ch;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return config_string(std::move(out));
  }

  ConfigValue number(const std::string& raw) {
    if (raw.empty()) fail("expected a value");
    std::string tok;
    for (char c : raw) {
      if (c != '_') tok += c;
    }
    const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    ConfigValue v;
    if (!is_float) {
      v.kind = ConfigValue::Kind::Int;
      const auto [p, ec] = std::from_chars(first, last, v.i);
      if (ec == std::errc() && p == last) return v;
    } else {
      v.kind = ConfigValue::Kind::Float;
      const auto [p, ec] = std::from_chars(first, last, v.d);
      if (ec == std::errc() && p == last && std::isfinite(v.d)) return v;
    }
    fail("cannot parse value '" + raw + "'");
  }

  std::string_view s_;
  std::string where_;
  std::size_t pos_ = 0;
};

std::string format_double(double d) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  std::string s(buf);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string ConfigValue::canonical() const {
  switch (kind) {
    case Kind::Bool:
      return b ? "true" : "false";
    case Kind::Int:
      return std::to_string(i);
    case Kind::Float:
      return format_double(d);
    case Kind::String:
      return nlohmann::json(s).dump();
    case Kind::Array: {
      std::string out = "[";
      for (std::size_t k = 0; k < items.size(); ++k) {
        if (k) out += ", ";
        out += items[k].canonical();
      }
      return out + "]";
    }
  }
  return {};
}

ConfigValue config_string(std::string s) {
  ConfigValue v;
  v.kind = ConfigValue::Kind::String;
  v.s = std::move(s);
  return v;
}

ConfigValue config_int(std::int64_t i) {
  ConfigValue v;
  v.kind = ConfigValue::Kind::Int;
  v.i = i;
  return v;
}

Config Config::parse(std::string_view text, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    LineParser p(line, source + ":" + std::to_string(n));
    if (p.at_end_or_comment()) continue;
    if (p.consume('[')) {
      section = p.dotted_key();
      if (!p.consume(']')) p.fail("expected ']' after section name");
      if (!p.at_end_or_comment()) p.fail("unexpected text after section header");
      continue;
    }
    const std::string key = (section.empty() ? "" : section + ".") + p.dotted_key();
    if (!p.consume('=')) p.fail("expected '=' after key '" + key + "'");
    ConfigValue v = p.value();
    if (!p.at_end_or_comment()) p.fail("unexpected text after value of '" + key + "'");
    if (!cfg.values_.emplace(key, std::move(v)).second) p.fail("duplicate key '" + key + "'");
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  Config cfg = parse(ss.str(), path);
  const auto parent = std::filesystem::path(path).parent_path();
  cfg.base_dir_ = parent.empty() ? "." : parent.string();
  return cfg;
}

const ConfigValue* Config::find(std::string_view key) const {
  used_.emplace(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

bool Config::has(std::string_view key) const { return find(key) != nullptr; }

const ConfigValue& Config::require(std::string_view key) const {
  const auto* v = find(key);
  if (!v) throw ConfigError(source_ + ": missing required key '" + std::string(key) + "'");
  return *v;
}

namespace {

[[noreturn]] void type_error(const std::string& source, std::string_view key, const std::string& expected,
                             const ConfigValue& got) {
  throw ConfigError(source + ": key '" + std::string(key) + "' must be " + expected + ", got " + kind_name(got.kind));
}

double as_double(const std::string& source, std::string_view key, const ConfigValue& v) {
  if (v.kind == ConfigValue::Kind::Float) return v.d;
  if (v.kind == ConfigValue::Kind::Int) return static_cast<double>(v.i);
  type_error(source, key, "a number", v);
}

}  // namespace

std::string Config::get_string(std::string_view key) const {
  const auto& v = require(key);
  if (v.kind != ConfigValue::Kind::String) type_error(source_, key, "a string", v);
  return v.s;
}

std::string Config::get_string(std::string_view key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::int64_t Config::get_int(std::string_view key) const {
  const auto& v = require(key);
  if (v.kind != ConfigValue::Kind::Int) type_error(source_, key, "an integer", v);
  return v.i;
}

std::int64_t Config::get_int(std::string_view key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double Config::get_double(std::string_view key) const { return as_double(source_, key, require(key)); }

double Config::get_double(std::string_view key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool(std::string_view key, bool fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (v->kind != ConfigValue::Kind::Bool) type_error(source_, key, "a boolean", *v);
  return v->b;
}

std::vector<double> Config::get_double_list(std::string_view key, const std::vector<double>& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (v->kind != ConfigValue::Kind::Array) type_error(source_, key, "an array", *v);
  std::vector<double> out;
  for (const auto& item : v->items) out.push_back(as_double(source_, key, item));
  return out;
}

std::vector<std::int64_t> Config::get_int_list(std::string_view key, const std::vector<std::int64_t>& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (v->kind != ConfigValue::Kind::Array) type_error(source_, key, "an array", *v);
  std::vector<std::int64_t> out;
  for (const auto& item : v->items) {
    if (item.kind != ConfigValue::Kind::Int) type_error(source_, key, "an array of integers", item);
    out.push_back(item.i);
  }
  return out;
}

void Config::set(const std::string& key, ConfigValue value) { values_[key] = std::move(value); }

std::string Config::canonical(std::string_view prefix) const {
  const std::string lead = prefix.empty() ? "" : std::string(prefix) + ".";
  std::string out;
  for (const auto& [k, v] : values_) {
    if (!lead.empty() && k.rfind(lead, 0) != 0 && k != prefix) continue;
    out += k + "=" + v.canonical() + "\n";
  }
  return out;
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace fanal
