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

#include "rankcollapse/experiment/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "rankcollapse/experiment/experiments.hpp"

namespace rankcollapse::experiment {

RunOutcome run_experiment(const Config& resolved, const std::filesystem::path& out_dir, std::size_t jobs,
                          const RunListener& listener) {
  std::vector<std::pair<std::string, std::uint64_t>> units;
  for (const auto& arm : resolved.get_list("arms"))
    for (std::uint64_t seed : resolved.get_seeds("seeds")) units.emplace_back(arm, seed);

  RunOutcome outcome;
  outcome.runs = units.size();
  outcome.files.resize(units.size());
  std::vector<char> diverged(units.size(), 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= units.size()) return;
      try {
        const auto start = std::chrono::steady_clock::now();
        const TraceFile trace = run_arm(resolved, units[i].first, units[i].second);
        write_trace(trace, out_dir);
        outcome.files[i] = out_dir / trace.file_name();
        diverged[i] = trace.diverged ? 1 : 0;
        if (listener)
          listener(trace, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, units.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (first_error) std::rethrow_exception(first_error);
  for (char d : diverged) outcome.diverged += static_cast<std::size_t>(d);
  return outcome;
}

std::filesystem::path output_root(const std::string& flag, const Config& resolved) {
  if (!flag.empty()) return flag;
  if (resolved.contains("output") && !resolved.raw("output").empty()) return resolved.raw("output");
  if (const char* env = std::getenv("RANKCOLLAPSE_OUT"); env != nullptr && *env != '\0') return env;
  return "runs";
}

}  // namespace rankcollapse::experiment
