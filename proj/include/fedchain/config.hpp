#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "fedchain/errors.hpp"

namespace fedchain {

// Flat `key = value` configuration with dotted section keys and `#` comments.
// Keys are tracked on read so unknown fields can be reported by name.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Keys present in the file but never read.
  std::set<std::string> unconsumed() const;

  // Keys sharing a prefix, e.g. all "optimizer.2." fields.
  std::set<std::string> keys_with_prefix(const std::string& prefix) const;

  const std::string& text() const { return text_; }

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> consumed_;
  std::string text_;
};

}  // namespace fedchain
