/* Copyright 2026 The twdkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Flat `key = value` configuration text. '#' lines are comments; later
// assignments win, and command-line overrides are applied with set().

#ifndef TWD_CONFIG_HPP_
#define TWD_CONFIG_HPP_

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "twd/errors.hpp"

namespace twd {

class Config {
 public:
  Config() = default;

  static Config parse(std::istream& stream) {
    Config cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
      ++line_no;
      const std::string_view trimmed = trim(line);
      if (trimmed.empty() || trimmed.front() == '#') continue;
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string_view::npos)
        throw ParseError(line_no, "expected 'key = value'");
      const std::string key(trim(trimmed.substr(0, eq)));
      const std::string value(trim(trimmed.substr(eq + 1)));
      if (key.empty()) throw ParseError(line_no, "empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static Config parse(const std::string& text) {
    std::istringstream stream(text);
    return parse(stream);
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("config: cannot open " + path);
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v{};
    const auto* begin = it->second.data();
    const auto* end = begin + it->second.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
      throw std::invalid_argument("config: key '" + key +
                                  "' is not an unsigned integer: " + it->second);
    return v;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v{};
    const auto* begin = it->second.data();
    const auto* end = begin + it->second.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
      throw std::invalid_argument("config: key '" + key +
                                  "' is not a number: " + it->second);
    return v;
  }

  // Comma-separated values; empty string means empty list.
  std::vector<std::string> get_list(const std::string& key) const {
    std::vector<std::string> items;
    const auto it = values_.find(key);
    if (it == values_.end() || trim(it->second).empty()) return items;
    std::string_view rest = it->second;
    while (true) {
      const std::size_t comma = rest.find(',');
      items.emplace_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return items;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> items;
    for (const std::string& token : get_list(key)) {
      double v{};
      const auto [ptr, ec] =
          std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc{} || ptr != token.data() + token.size())
        throw std::invalid_argument("config: key '" + key +
                                    "' has a non-numeric item: " + token);
      items.push_back(v);
    }
    return items;
  }

  // Canonical text form: sorted keys, one `key = value` per line.
  std::string dump() const {
    std::string out;
    for (const auto& [key, value] : values_)
      out += key + " = " + value + "\n";
    return out;
  }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                          s.front() == '\r'))
      s.remove_prefix(1);
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
      s.remove_suffix(1);
    return s;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace twd

#endif  // TWD_CONFIG_HPP_
