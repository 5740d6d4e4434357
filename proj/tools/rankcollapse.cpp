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

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rankcollapse/experiment/config.hpp"
#include "rankcollapse/experiment/experiments.hpp"
#include "rankcollapse/experiment/report.hpp"
#include "rankcollapse/experiment/runner.hpp"
#include "rankcollapse/experiment/trace_file.hpp"

namespace {

namespace rx = rankcollapse::experiment;

constexpr int kExitConfig = 2;
constexpr int kExitAllDiverged = 3;
constexpr int kExitCriterionFailed = 4;

rx::Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw rx::ConfigError("", "cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  rx::Config cfg = rx::Config::parse(text.str());
  for (const auto& o : overrides) cfg.set(o);
  return rx::resolve_config(cfg);
}

int run_command(const std::string& path, const std::vector<std::string>& overrides, const std::string& out_flag,
                std::size_t jobs) {
  const rx::Config cfg = load_config(path, overrides);
  const auto out_dir = rx::output_root(out_flag, cfg);
  std::mutex log_mutex;
  const auto outcome = rx::run_experiment(cfg, out_dir, jobs, [&](const rx::TraceFile& t, double seconds) {
    std::lock_guard lock(log_mutex);
    std::fprintf(stderr, "%s arm %s seed %llu: %zu rows%s in %.1f s\n", t.experiment.c_str(), t.arm.c_str(),
                 static_cast<unsigned long long>(t.seed), t.rows.size(), t.diverged ? " (diverged)" : "", seconds);
  });
  std::printf("wrote %zu traces to %s (%zu diverged)\n", outcome.files.size(), out_dir.string().c_str(),
              outcome.diverged);
  return outcome.all_diverged() ? kExitAllDiverged : 0;
}

int report_command(const std::string& dir, bool json, bool strict) {
  const auto report = rx::evaluate_report(rx::read_trace_dir(dir));
  std::cout << (json ? rx::format_report_json(report) : rx::format_report_text(report));
  return strict && report.any_failed() ? kExitCriterionFailed : 0;
}

int list_command() {
  for (const auto& info : rx::experiment_registry()) {
    std::string arms;
    for (const auto& key : info.keys)
      if (key.key == "arms") arms = key.default_value;
    std::printf("%-15s %s [arms: %s]\n", info.name.c_str(), info.summary.c_str(), arms.c_str());
  }
  return 0;
}

int defaults_command(const std::string& name) {
  rx::Config user;
  user.set("experiment", name);
  std::cout << rx::resolve_config(user).serialize();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-collapse experiments: run seeded traces and evaluate them."};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::size_t jobs = 1;
  auto* run = app.add_subcommand("run", "Run every arm and seed of an experiment config");
  run->add_option("config", config_path, "Config file (key = value lines)")->required();
  run->add_option("--set", overrides, "Override one key, as key=value")->allow_extra_args(false);
  run->add_option("--out", out_dir, "Output directory (default: config output key, $RANKCOLLAPSE_OUT, runs)");
  run->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string trace_dir;
  bool json = false;
  bool strict = false;
  auto* report = app.add_subcommand("report", "Evaluate acceptance criteria over a trace directory");
  report->add_option("dir", trace_dir, "Directory of trace CSVs")->required();
  report->add_flag("--json", json, "Emit machine-readable JSON");
  report->add_flag("--strict", strict, "Exit 4 when any criterion fails");

  auto* list = app.add_subcommand("list-experiments", "List experiments and their arms");

  std::string experiment;
  auto* defaults = app.add_subcommand("defaults", "Print the resolved default config of an experiment");
  defaults->add_option("experiment", experiment, "Experiment name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; usage errors count as config errors.
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return run_command(config_path, overrides, out_dir, jobs);
    if (report->parsed()) return report_command(trace_dir, json, strict);
    if (list->parsed()) return list_command();
    if (defaults->parsed()) return defaults_command(experiment);
  } catch (const rx::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
