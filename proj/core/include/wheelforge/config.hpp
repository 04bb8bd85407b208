#pragma once

#include <map>
#include <string>
#include <vector>

namespace wheelforge {

/// Flat key=value configuration with [section] grouping; keys are stored
/// as "section.key". Later assignments win, which is how command-line
/// overrides layer on top of the file.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Comma-separated numeric lists, e.g. "lambdas = 0, 0.5, 2".
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& key,
                            const std::vector<int>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace wheelforge
