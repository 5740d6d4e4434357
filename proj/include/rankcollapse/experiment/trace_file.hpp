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
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankcollapse/experiment/config.hpp"

namespace rankcollapse::experiment {

// Bumped whenever any experiment family changes its columns.
inline constexpr int kTraceSchemaVersion = 1;

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One CSV per (experiment, arm, seed). The '#' header carries the schema
// version, identity fields and the resolved config verbatim.
struct TraceFile {
  std::string experiment;
  std::string arm;
  std::uint64_t seed = 0;
  bool diverged = false;
  Config config;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws TraceFormatError
  std::vector<double> values(const std::string& name) const;
  double last(const std::string& name) const;

  std::string file_name() const;
};

// Columns per experiment family; readers reject files that differ.
const std::vector<std::string>& columns_for(const std::string& experiment);

std::string format_trace(const TraceFile& trace);
TraceFile parse_trace(const std::string& text);

void write_trace(const TraceFile& trace, const std::filesystem::path& dir);
TraceFile read_trace(const std::filesystem::path& path);
// All *.csv traces in a directory, sorted by file name.
std::vector<TraceFile> read_trace_dir(const std::filesystem::path& dir);

}  // namespace rankcollapse::experiment
