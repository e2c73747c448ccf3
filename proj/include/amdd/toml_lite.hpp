#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "amdd/types.hpp"

namespace amdd {

// Minimal flat TOML reader covering what run configuration files need:
// [section] headers, and key = "string" | integer | float | true/false lines.
// Keys are stored as "section.key" ("key" when before any section).

class TomlTable {
 public:
  std::optional<std::string> get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || !std::holds_alternative<std::string>(it->second))
      return std::nullopt;
    return std::get<std::string>(it->second);
  }
  std::optional<std::int64_t> get_int(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || !std::holds_alternative<std::int64_t>(it->second))
      return std::nullopt;
    return std::get<std::int64_t>(it->second);
  }
  std::optional<double> get_real(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (std::holds_alternative<double>(it->second)) return std::get<double>(it->second);
    if (std::holds_alternative<std::int64_t>(it->second))
      return static_cast<double>(std::get<std::int64_t>(it->second));
    return std::nullopt;
  }
  std::optional<bool> get_bool(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || !std::holds_alternative<bool>(it->second))
      return std::nullopt;
    return std::get<bool>(it->second);
  }
  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, Value>& values() const { return values_; }

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }

 private:
  std::map<std::string, Value> values_;
};

inline TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  std::string section;

  auto trim = [](std::string s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };

  while (std::getline(in, raw)) {
    ++number;
    std::string line = raw;
    // strip comments, but not inside a quoted string
    bool inQuote = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') inQuote = !inQuote;
      if (line[i] == '#' && !inQuote) { line = line.substr(0, i); break; }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("section header needs a closing ']'", number, 1);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError("empty section name", number, 1);
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", number, 1);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", number, 1);
    if (value.empty()) throw ParseError("empty value for key '" + key + "'", number, 1);
    std::string full = section.empty() ? key : section + "." + key;
    if (table.contains(full))
      throw ParseError("duplicate key '" + full + "'", number, 1);

    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        throw ParseError("unterminated string for key '" + key + "'", number, 1);
      table.set(full, value.substr(1, value.size() - 2));
    } else if (value == "true" || value == "false") {
      table.set(full, value == "true");
    } else {
      try {
        size_t used = 0;
        if (value.find('.') != std::string::npos ||
            value.find('e') != std::string::npos) {
          double d = std::stod(value, &used);
          if (used != value.size()) throw std::invalid_argument(value);
          table.set(full, d);
        } else {
          std::int64_t n = std::stoll(value, &used);
          if (used != value.size()) throw std::invalid_argument(value);
          table.set(full, n);
        }
      } catch (const std::exception&) {
        throw ParseError("unrecognized value '" + value + "' for key '" + key + "'",
                         number, 1);
      }
    }
  }
  return table;
}

}  // namespace amdd
