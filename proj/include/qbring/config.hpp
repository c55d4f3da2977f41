#pragma once

// Run configuration: flat `key = value` text files, '#' starts a comment,
// and every key can be overridden on the command line as `--key value`.
// Keys nobody consumed are errors, with the file line in the diagnostic.

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qbring/errors.hpp"
#include "qbring/model.hpp"

namespace qbring {

class RunConfig {
 public:
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": expected 'key = value', got '" + trimmed + "'");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
      values_[key] = value;
      origin_[key] = path + ":" + std::to_string(lineno);
    }
  }

  // --key value pairs; `--config path` loads a file at its position, so
  // later flags override file entries.
  void apply_flags(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a.rfind("--", 0) != 0)
        throw ConfigError("expected --key, got '" + a + "'");
      const std::string key = a.substr(2);
      if (i + 1 >= args.size())
        throw ConfigError("flag --" + key + " is missing its value");
      const std::string& value = args[++i];
      if (key == "config") {
        load_file(value);
      } else {
        values_[key] = value;
        origin_[key] = "command line";
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_double(key, it->second);
  }

  int get_int(const std::string& key, int fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const int v = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError(where(key) + ": '" + key + "' needs an integer, got '" +
                        it->second + "'");
    }
  }

  // Comma-separated list of reals; also accepts a single value.
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty())
      throw ConfigError(where(key) + ": '" + key + "' needs at least one value");
    return out;
  }

  // nu accepts numbers plus the distinguished words.
  double get_nu(const std::string& key, double fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "unitary" || it->second == "inf") return kUnitary;
    if (it->second == "instant") return kInstantDephase;
    return parse_double(key, it->second);
  }

  // Unknown keys are configuration errors, named with their origin.
  void reject_unconsumed() const {
    std::string bad;
    for (const auto& [key, value] : values_)
      if (!consumed_.count(key)) {
        if (!bad.empty()) bad += ", ";
        bad += "'" + key + "' (" + origin_.at(key) + ")";
      }
    if (!bad.empty()) throw ConfigError("unknown configuration keys: " + bad);
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  std::string where(const std::string& key) const {
    const auto it = origin_.find(key);
    return it == origin_.end() ? "config" : it->second;
  }

  double parse_double(const std::string& key, const std::string& text) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError(where(key) + ": '" + key + "' needs a number, got '" +
                        text + "'");
    }
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origin_;
  std::set<std::string> consumed_;
};

}  // namespace qbring
