#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>

#include "pokforge/errors.hpp"

namespace pokforge::cli {

struct ConfigError : Error {
  using Error::Error;
};

/// Flat dotted-key configuration. Files are either `key = value` lines
/// ('#' starts a comment) or a JSON object whose nested objects flatten to
/// dotted keys.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  /// Removes and returns a key; removed keys do not enter the hash.
  std::optional<std::string> take(const std::string& key);

  std::string str(const std::string& key, const std::string& fallback);
  double num(const std::string& key, double fallback);
  std::size_t count(const std::string& key, std::size_t fallback);
  std::uint64_t u64(const std::string& key, std::uint64_t fallback);

  void accept(std::initializer_list<const char*> keys) {
    for (const char* k : keys) used_[k] = true;
  }

  /// Throws ConfigError naming any key that no command looked up.
  void reject_unused() const;

  /// Canonical "key=value" lines, sorted by key.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), 16 hex digits.
  std::string hash() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> used_;
};

std::uint64_t parse_u64(const std::string& text, const std::string& what);

}  // namespace pokforge::cli
