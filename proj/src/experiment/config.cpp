// Copyright 2026 The rankcollapse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "rankcollapse/experiment/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace rankcollapse::experiment {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) return false;
  return true;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::runtime_error(key.empty() ? what : "config key '" + key + "': " + what), key_(std::move(key)) {}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (body.find('=') == std::string::npos)
      throw ConfigError("", "line " + std::to_string(number) + ": expected 'key = value'");
    cfg.set(body);
  }
  return cfg;
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("", "override '" + assignment + "' is not of the form key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError(key, "invalid key name");
  if (value.find('\n') != std::string::npos) throw ConfigError(key, "value spans lines");
  values_[key] = value;
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "missing");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string& text = raw(key);
  // from_chars for double is not in libstdc++ 11, so use strtod with a full-consumption check.
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

std::int64_t Config::get_int(const std::string& key) const {
  std::int64_t v = 0;
  if (!parse_number(raw(key), v)) throw ConfigError(key, "expected an integer, got '" + raw(key) + "'");
  return v;
}

std::size_t Config::get_size(const std::string& key) const {
  std::size_t v = 0;
  if (!parse_number(raw(key), v)) throw ConfigError(key, "expected a non-negative integer, got '" + raw(key) + "'");
  return v;
}

bool Config::get_bool(const std::string& key) const {
  const std::string& text = raw(key);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::vector<std::uint64_t> Config::get_seeds(const std::string& key) const {
  try {
    return parse_seed_list(raw(key));
  } catch (const ConfigError& e) {
    throw ConfigError(key, e.what());
  }
}

std::vector<std::size_t> Config::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : split(raw(key), ',')) {
    std::size_t v = 0;
    if (!parse_number(item, v)) throw ConfigError(key, "expected a list of non-negative integers");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> Config::get_list(const std::string& key) const { return split(raw(key), ','); }

std::string Config::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string Config::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split(text, ',')) {
    const auto dots = item.find("..");
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    const bool ok = dots == std::string::npos
                        ? parse_number(item, lo) && ((hi = lo), true)
                        : parse_number(item.substr(0, dots), lo) && parse_number(item.substr(dots + 2), hi);
    if (!ok || hi < lo) throw ConfigError("", "bad seed list entry '" + item + "'");
    if (hi - lo > 100000) throw ConfigError("", "seed range '" + item + "' is too long");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("", "empty seed list");
  return seeds;
}

}  // namespace rankcollapse::experiment
