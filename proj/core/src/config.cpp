#include "wheelforge/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "wheelforge/errors.hpp"

namespace wheelforge {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& raw) {
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (trim(raw.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigInvalid("config value for '" + key + "' is not a number: " + raw);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::stringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigInvalid("config line " + std::to_string(lineno) +
                            ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("config line " + std::to_string(lineno) +
                          ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigInvalid("config line " + std::to_string(lineno) + ": empty key");
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double v = parse_double(key, it->second);
  const int i = static_cast<int>(v);
  if (double(i) != v)
    throw ConfigInvalid("config value for '" + key + "' is not an integer");
  return i;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigInvalid("config value for '" + key + "' is not a boolean: " + v);
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty())
    throw ConfigInvalid("config value for '" + key + "' is an empty list");
  return out;
}

std::vector<int> Config::get_ints(const std::string& key,
                                  const std::vector<int>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  for (double v : get_doubles(key, {})) {
    const int i = static_cast<int>(v);
    if (double(i) != v)
      throw ConfigInvalid("config value for '" + key + "' holds a non-integer");
    out.push_back(i);
  }
  return out;
}

}  // namespace wheelforge
