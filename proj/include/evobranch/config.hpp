// Copyright 2026 The evobranch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EVOBRANCH_CONFIG_HPP_
#define EVOBRANCH_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evobranch/evolve.hpp"

namespace evobranch {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A small TOML subset: `[section]` headers, `key = value` lines and `#`
// comments. Values are numbers, true/false, "strings" or one-line arrays of
// those. Keys are stored as "section.key".
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  // Missing or unreadable files raise ConfigError.
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  // Throws ConfigError naming the first key outside `known`.
  void reject_unknown(const std::set<std::string>& known) const;

 private:
  struct Value {
    std::vector<std::string> items;  // one item unless the value was an array
    bool array = false;
    int line = 0;
  };
  const Value* find(const std::string& key) const;
  std::map<std::string, Value> values_;
};

// [solve] node_limit and time_limit plus the top-level seed; unset keys keep
// the BnbConfig defaults.
BnbConfig solve_config_from(const KeyValueConfig& cfg);

// Builds an evolution run from [evolve], [instances], [metric], [tuning] and
// [llm]; [solve] limits apply unless [tuning] overrides them. Relative paths
// resolve against `base_dir`.
EvolutionConfig evolution_config_from(const KeyValueConfig& cfg, const std::filesystem::path& base_dir);

// Keys accepted by evolution_config_from.
const std::set<std::string>& evolution_config_keys();

}  // namespace evobranch

#endif  // EVOBRANCH_CONFIG_HPP_
