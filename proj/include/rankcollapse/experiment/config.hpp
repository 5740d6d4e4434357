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

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankcollapse::experiment {

// Raised for malformed text, unknown keys and unparsable values. key() names
// the offending key when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Flat key = value text with dotted section prefixes. Blank lines and lines
// starting with '#' are ignored; later assignments override earlier ones.
class Config {
 public:
  static Config parse(const std::string& text);

  // Applies one "key=value" override.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key) const { return raw(key); }
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::uint64_t> get_seeds(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  // One "key = value" line per entry in key order; parse(serialize()) is the
  // identity.
  std::string serialize() const;
  // FNV-1a of serialize(), as 16 hex digits.
  std::string digest() const;

  bool operator==(const Config& other) const = default;

 private:
  std::map<std::string, std::string> values_;
};

// Seed lists accept "1,2,5" and inclusive ranges "1..5", mixed freely.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace rankcollapse::experiment
