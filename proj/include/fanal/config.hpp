// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fanal {

/// A scalar or a one-level array of scalars.
struct ConfigValue {
  enum class Kind { Bool, Int, Float, String, Array };
  Kind kind = Kind::String;
  bool b = false;
  std::int64_t i = 0;
  double d = 0.0;
  std::string s;
  std::vector<ConfigValue> items;

  /// Stable textual form used for hashing.
  std::string canonical() const;
};

/// Flat key/value configuration in a TOML subset: `[section]` and
/// `[section.sub]` headers, `key = value` lines, `#` comments, basic and
/// literal strings, integers, floats, booleans and single-line arrays.
/// Keys are addressed by their full dotted path. All errors are ConfigError.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& source = "<config>");
  static Config load(const std::string& path);

  bool has(std::string_view key) const;
  const ConfigValue& require(std::string_view key) const;

  std::string get_string(std::string_view key) const;
  std::string get_string(std::string_view key, const std::string& fallback) const;
  std::int64_t get_int(std::string_view key) const;
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  /// Integers are accepted where a float is expected.
  double get_double(std::string_view key) const;
  double get_double(std::string_view key, double fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<double> get_double_list(std::string_view key, const std::vector<double>& fallback) const;
  std::vector<std::int64_t> get_int_list(std::string_view key, const std::vector<std::int64_t>& fallback) const;

  void set(const std::string& key, ConfigValue value);

  /// Canonical "key=value" lines for every key under `prefix.` (all keys
  /// when prefix is empty), sorted by key.
  std::string canonical(std::string_view prefix = {}) const;

  /// Keys never read through a getter or has().
  std::vector<std::string> unused_keys() const;

  /// Directory of the loaded file; relative paths resolve against it.
  const std::string& base_dir() const noexcept { return base_dir_; }
  const std::string& source() const noexcept { return source_; }

 private:
  const ConfigValue* find(std::string_view key) const;

  std::map<std::string, ConfigValue, std::less<>> values_;
  mutable std::set<std::string, std::less<>> used_;
  std::string base_dir_ = ".";
  std::string source_;
};

ConfigValue config_string(std::string s);
ConfigValue config_int(std::int64_t v);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
/// Throws DataError if the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace fanal
