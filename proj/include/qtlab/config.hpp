#pragma once

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qtlab/errors.hpp"

namespace qtlab {

// Flat key = value file; '#' starts a comment, dotted prefixes group keys.
class ConfigMap {
 public:
  ConfigMap() = default;

  static ConfigMap from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    ConfigMap cfg;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config: line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config: line " + std::to_string(lineno) + ": empty key");
      cfg.set(key, value);
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) {
    if (map_.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
    map_[key] = value;
    order_.push_back(key);
  }

  void override_value(const std::string& key, const std::string& value) {
    if (!map_.count(key)) order_.push_back(key);
    map_[key] = value;
  }

  bool has(const std::string& key) const { return map_.count(key) != 0; }

  std::string get_string(const std::string& key) const {
    const auto it = map_.find(key);
    if (it == map_.end()) throw ConfigError("config: missing required key '" + key + "'");
    touched_.insert(key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    return has(key) ? get_string(key) : dflt;
  }

  double get_double(const std::string& key) const {
    const std::string v = get_string(key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw ConfigError("config: key '" + key + "' is not a number: '" + v + "'");
    return x;
  }

  double get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
  }

  long get_long(const std::string& key) const {
    const std::string v = get_string(key);
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
      throw ConfigError("config: key '" + key + "' is not an integer: '" + v + "'");
    return x;
  }

  long get_long(const std::string& key, long dflt) const {
    return has(key) ? get_long(key) : dflt;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    const std::string v = get_string(key);
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) throw ConfigError("config: key '" + key + "' has an empty list entry");
      char* end = nullptr;
      const double x = std::strtod(t.c_str(), &end);
      if (end == t.c_str() || *end != '\0')
        throw ConfigError("config: key '" + key + "' has a non-numeric entry: '" + t + "'");
      out.push_back(x);
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' is an empty list");
    return out;
  }

  // keys never read by the command schema are reported as errors
  void reject_unknown() const {
    std::vector<std::string> unknown;
    for (const auto& k : order_)
      if (!touched_.count(k)) unknown.push_back(k);
    if (!unknown.empty()) {
      std::string msg = "config: unknown key(s):";
      for (const auto& k : unknown) msg += " '" + k + "'";
      throw ConfigError(msg);
    }
  }

  const std::vector<std::string>& keys_in_order() const { return order_; }
  std::string raw(const std::string& key) const { return map_.at(key); }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

 private:
  std::map<std::string, std::string> map_;
  std::vector<std::string> order_;
  mutable std::set<std::string> touched_;
};

}
