#include "fedchain/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fedchain {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  c.text_ = text;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    }
    c.kv_[key] = val;
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  consumed_.insert(key);
  return it->second;
}

std::string Config::require_string(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing required field: " + key);
  consumed_.insert(key);
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  consumed_.insert(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field " + key + ": expected a number, got '" +
                      it->second + "'");
  }
}

long long Config::get_int(const std::string& key, long long fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  consumed_.insert(key);
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field " + key + ": expected an integer, got '" +
                      it->second + "'");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  consumed_.insert(key);
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("field " + key + ": expected a boolean, got '" + v + "'");
}

std::set<std::string> Config::unconsumed() const {
  std::set<std::string> out;
  for (const auto& [k, v] : kv_) {
    if (consumed_.count(k) == 0) out.insert(k);
  }
  return out;
}

std::set<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  std::set<std::string> out;
  for (const auto& [k, v] : kv_) {
    if (k.rfind(prefix, 0) == 0) out.insert(k);
  }
  return out;
}

}  // namespace fedchain
