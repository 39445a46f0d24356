#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "frogsdm/csv.hpp"

namespace frogsdm {

// Sectioned key = value text. Keys are addressed as "section.key"; keys
// before any [section] header live in the "" section and are addressed bare.
class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto comment = line.find('#');
      if (comment != std::string::npos) line.erase(comment);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw std::runtime_error("config line " + std::to_string(line_no) +
                                   ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty())
        throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
      const std::string full = section.empty() ? key : section + "." + key;
      cfg.values_[full] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static ConfigFile load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("config key '" + key + "' is missing");
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const { return to_double(key, get_string(key)); }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
  }

  long get_long(const std::string& key) const { return to_long(key, get_string(key)); }

  long get_long(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_long(key, it->second);
  }

  std::uint64_t get_u64(const std::string& key) const {
    const long v = get_long(key);
    if (v < 0) throw std::runtime_error("config key '" + key + "' must be non-negative");
    return static_cast<std::uint64_t>(v);
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::runtime_error("config key '" + key + "' must be true|false");
  }

  std::vector<long> get_long_list(const std::string& key, const std::vector<long>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<long> out;
    std::istringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_long(key, trim(item)));
    return out;
  }

  // Canonical text: sorted "key = value" lines. Hashing this makes the
  // manifest hash independent of declaration order and comments.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  std::uint64_t hash() const {
    const std::string c = canonical();
    return fnv1a_hash(c.data(), c.size());
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
  }

  static double to_double(const std::string& key, const std::string& value) {
    try {
      return parse_double(value);
    } catch (const std::exception&) {
      throw std::runtime_error("config key '" + key + "': '" + value + "' is not a number");
    }
  }

  static long to_long(const std::string& key, const std::string& value) {
    try {
      return parse_long(value);
    } catch (const std::exception&) {
      throw std::runtime_error("config key '" + key + "': '" + value + "' is not an integer");
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace frogsdm
