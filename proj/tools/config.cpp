#include "config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace pokforge::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void flatten(const nlohmann::json& j, const std::string& prefix, Config& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const auto& v = it.value();
    if (v.is_object())
      flatten(v, key, out);
    else if (v.is_string())
      out.set(key, v.get<std::string>());
    else if (v.is_boolean())
      out.set(key, v.get<bool>() ? "true" : "false");
    else if (v.is_number_unsigned())
      out.set(key, std::to_string(v.get<std::uint64_t>()));
    else if (v.is_number_integer())
      out.set(key, std::to_string(v.get<std::int64_t>()));
    else if (v.is_number_float())
      out.set(key, v.dump());
    else
      throw ConfigError("unsupported value for config key " + key);
  }
}

}  // namespace

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.empty() || t[0] == '-' || t[0] == '+') throw ConfigError("invalid " + what + ": '" + text + "'");
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (errno != 0 || *end != '\0') throw ConfigError("invalid " + what + ": '" + text + "'");
  return v;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config JSON: ") + e.what());
    }
    flatten(j, "", cfg);
    return cfg;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> Config::take(const std::string& key) {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  std::string v = it->second;
  values_.erase(it);
  return v;
}

std::string Config::str(const std::string& key, const std::string& fallback) {
  used_[key] = true;
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::num(const std::string& key, double fallback) {
  used_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(it->second.c_str(), &end);
  if (it->second.empty() || errno != 0 || *end != '\0')
    throw ConfigError("config key " + key + ": not a number: '" + it->second + "'");
  return v;
}

std::size_t Config::count(const std::string& key, std::size_t fallback) {
  used_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return static_cast<std::size_t>(parse_u64(it->second, "value for " + key));
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) {
  used_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return parse_u64(it->second, "value for " + key);
}

void Config::reject_unused() const {
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) throw ConfigError("unknown config key: " + k);
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pokforge::cli
