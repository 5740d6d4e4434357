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
#include <string>
#include <vector>

#include "rankcollapse/experiment/config.hpp"
#include "rankcollapse/experiment/trace_file.hpp"

namespace rankcollapse::experiment {

enum class ValueKind { string, integer, size, real, boolean, seeds, sizes, list };

struct KeySpec {
  std::string key;
  ValueKind kind = ValueKind::string;
  std::string default_value;
  std::vector<std::string> choices;  // allowed values (each list item) when non-empty
};

struct ExperimentInfo {
  std::string name;
  std::string summary;
  std::vector<KeySpec> keys;  // includes experiment, seeds, arms and output
};

const std::vector<ExperimentInfo>& experiment_registry();
// Throws ConfigError on key "experiment" for unknown names.
const ExperimentInfo& find_experiment(const std::string& name);

// The named experiment's defaults overlaid with every entry of `user`.
// Unknown keys and unparsable or out-of-range values raise ConfigError
// naming the key.
Config resolve_config(const Config& user);

// One trace for (arm, seed). Deterministic in the resolved config and seed.
TraceFile run_arm(const Config& resolved, const std::string& arm, std::uint64_t seed);

}  // namespace rankcollapse::experiment
