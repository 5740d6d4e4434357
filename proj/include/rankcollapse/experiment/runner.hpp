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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rankcollapse/experiment/config.hpp"
#include "rankcollapse/experiment/trace_file.hpp"

namespace rankcollapse::experiment {

struct RunOutcome {
  std::vector<std::filesystem::path> files;  // in (arm, seed) order
  std::size_t runs = 0;
  std::size_t diverged = 0;

  bool all_diverged() const { return runs > 0 && diverged == runs; }
};

// Called after each finished run, from the worker thread that ran it.
using RunListener = std::function<void(const TraceFile&, double seconds)>;

// Every (arm, seed) of a resolved config, fanned out over `jobs` worker
// threads. Each worker writes its own trace files into out_dir. The first
// exception from any run is rethrown after all workers stop.
RunOutcome run_experiment(const Config& resolved, const std::filesystem::path& out_dir, std::size_t jobs,
                          const RunListener& listener = {});

// Output directory precedence: explicit flag, the config's output key, the
// RANKCOLLAPSE_OUT environment variable, then "runs".
std::filesystem::path output_root(const std::string& flag, const Config& resolved);

}  // namespace rankcollapse::experiment
