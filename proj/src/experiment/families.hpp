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

#include "rankcollapse/experiment/config.hpp"
#include "rankcollapse/experiment/trace_file.hpp"

// Per-family runners. Each fills columns, rows and the diverged flag; the
// caller stamps identity and config.
namespace rankcollapse::experiment::detail {

TraceFile kernel_psd_trace(const Config& cfg, std::uint64_t seed);
TraceFile kernel_normal_trace(const Config& cfg, std::uint64_t seed);
TraceFile linear_flow_trace(const Config& cfg, std::uint64_t seed);
TraceFile linear_fqi_trace(const Config& cfg, const std::string& arm, std::uint64_t seed);
TraceFile grid_trace(const Config& cfg, const std::string& arm, std::uint64_t seed);

// Semantic checks beyond value types; throw ConfigError naming the key.
void check_kernel(const Config& cfg);
void check_flow(const Config& cfg);
void check_grid(const Config& cfg);

}  // namespace rankcollapse::experiment::detail
