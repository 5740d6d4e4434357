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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rankcollapse/experiment/config.hpp"
#include "rankcollapse/experiment/experiments.hpp"
#include "rankcollapse/experiment/report.hpp"
#include "rankcollapse/experiment/runner.hpp"
#include "rankcollapse/experiment/trace_file.hpp"

using namespace rankcollapse::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rankcollapse_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Config resolved(const std::string& text) { return resolve_config(Config::parse(text)); }

// A small gridworld run that finishes in well under a second.
std::string tiny_grid(const std::string& experiment) {
  return "experiment = " + experiment +
         "\nseeds = 1..2\ngrid.side = 5\ngrid.feature_dim = 8\ndataset.size = 200\nfqi.iterations = 4\n"
         "fqi.long_steps = 5\nfqi.short_steps = 2\nfqi.trace_every = 2\nfqi.hidden = 8,8\nmc.rollouts = 2\n"
         "online.iterations = 2\nonline.env_steps_per_iteration = 40\n";
}

TraceFile synthetic(const std::string& experiment, const std::string& arm, std::uint64_t seed,
                    std::vector<std::vector<double>> rows) {
  TraceFile t;
  t.experiment = experiment;
  t.arm = arm;
  t.seed = seed;
  Config cfg;
  cfg.set("experiment", experiment);
  t.config = experiment == "kernel-psd" ? resolve_config(cfg) : cfg;
  t.columns = columns_for(experiment);
  t.rows = std::move(rows);
  return t;
}

// Grid rows with the given srank sequence, TD error and greedy return.
TraceFile grid_run(const std::string& experiment, const std::string& arm, std::uint64_t seed,
                   std::vector<double> sranks, double td = 0.1, double ret = -5.0) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < sranks.size(); ++i)
    rows.push_back({double(i + 1), double(10 * (i + 1)), sranks[i], td, 0.5, ret, 0.0});
  return synthetic(experiment, arm, seed, std::move(rows));
}

const CriterionResult& criterion(const Report& report, int id) { return report.criteria.at(id - 1); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

// Config --------------------------------------------------------------------

TEST(Config, ParseIgnoresCommentsAndLaterAssignmentsWin) {
  const auto cfg = Config::parse("# heading\n\n a.b = 1 \nname=x y\na.b = 2\n");
  EXPECT_EQ(cfg.raw("a.b"), "2");
  EXPECT_EQ(cfg.raw("name"), "x y");
  EXPECT_EQ(cfg.values().size(), 2u);
}

TEST(Config, SerializeRoundTripIsIdentity) {
  Config cfg;
  cfg.set("z.last", "0.30000000000000004");
  cfg.set("a.first", "1..5,9");
  cfg.set("m.empty", "");
  cfg.set("m.spaces", "two words");
  const Config again = Config::parse(cfg.serialize());
  EXPECT_EQ(again, cfg);
  EXPECT_EQ(again.serialize(), cfg.serialize());
  EXPECT_EQ(again.digest(), cfg.digest());
  for (const auto& info : experiment_registry()) {
    Config user;
    user.set("experiment", info.name);
    const Config full = resolve_config(user);
    EXPECT_EQ(Config::parse(full.serialize()), full) << info.name;
  }
}

TEST(Config, DigestTracksContent) {
  Config a;
  a.set("k", "1");
  Config b = a;
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.digest().size(), 16u);
  b.set("k", "2");
  EXPECT_NE(a.digest(), b.digest());
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_THROW(Config::parse("no equals sign\n"), ConfigError);
  Config cfg;
  EXPECT_THROW(cfg.set("bad key", "1"), ConfigError);
  EXPECT_THROW(cfg.set("novalue"), ConfigError);
  cfg.set("n=abc");
  try {
    cfg.get_double("n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "n");
  }
  EXPECT_THROW(cfg.get_size("n"), ConfigError);
  EXPECT_THROW(cfg.get_bool("n"), ConfigError);
  EXPECT_THROW(cfg.raw("missing"), ConfigError);
  cfg.set("neg", "-3");
  EXPECT_EQ(cfg.get_int("neg"), -3);
  EXPECT_THROW(cfg.get_size("neg"), ConfigError);
}

TEST(Config, SeedLists) {
  EXPECT_EQ(parse_seed_list("1..3,7"), (std::vector<std::uint64_t>{1, 2, 3, 7}));
  EXPECT_EQ(parse_seed_list("5"), (std::vector<std::uint64_t>{5}));
  EXPECT_THROW(parse_seed_list("3..1"), ConfigError);
  EXPECT_THROW(parse_seed_list("a"), ConfigError);
  EXPECT_THROW(parse_seed_list(""), ConfigError);
}

TEST(ResolveConfig, StrictKeysAndValues) {
  auto key_of = [](const std::string& text) {
    try {
      resolved(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of("experiment = kernel-psd\nkernel.typo = 1\n"), "kernel.typo");
  EXPECT_EQ(key_of("experiment = kernel-psd\nfqi.iterations = 3\n"), "fqi.iterations");
  EXPECT_EQ(key_of("seeds = 1\n"), "experiment");
  EXPECT_EQ(key_of("experiment = nonsense\n"), "experiment");
  EXPECT_EQ(key_of("experiment = grid-offline\nfqi.backup = greedy\n"), "fqi.backup");
  EXPECT_EQ(key_of("experiment = grid-offline\narms = t10,lp\n"), "arms");
  EXPECT_EQ(key_of("experiment = kernel-psd\nseeds = 4..2\n"), "seeds");
  EXPECT_EQ(key_of("experiment = kernel-psd\nkernel.max_eigenvalue = 1.5\n"), "kernel.max_eigenvalue");
  EXPECT_EQ(key_of("experiment = grid-offline\nfqi.batch_size = 0\n"), "fqi");
  EXPECT_EQ(key_of("experiment = grid-offline\narms = t10\n"), "<none>");
}

TEST(ResolveConfig, DefaultsFillEveryKey) {
  const Config cfg = resolved("experiment = grid-offline\n");
  EXPECT_EQ(cfg.get_seeds("seeds").size(), 5u);
  EXPECT_EQ(cfg.get_size("fqi.short_steps"), 10u);
  EXPECT_EQ(cfg.get_size("fqi.long_steps"), 200u);
  EXPECT_EQ(cfg.get_list("arms"), (std::vector<std::string>{"t10", "t200", "qstar"}));
  EXPECT_EQ(resolved("experiment = kernel-psd\n").get_seeds("seeds").size(), 50u);
  EXPECT_EQ(resolved("experiment = kernel-normal\n").get_seeds("seeds").size(), 10u);
  EXPECT_EQ(resolved("experiment = linear-flow\n").get_seeds("seeds").size(), 20u);
}

// Trace files ---------------------------------------------------------------

TEST(TraceFile, RoundTripPreservesEveryBit) {
  TraceFile t = synthetic("kernel-psd", "psd", 7, {});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  t.rows = {{1, 3, nan, 0.1 + 0.2, 1e-300, 0, 0, 0, -std::numeric_limits<double>::infinity()},
            {2, 3, 0.99, 1.0 / 3.0, 5e-324, 1, 2, 0, 1e-17}};
  t.diverged = true;
  const TraceFile back = parse_trace(format_trace(t));
  EXPECT_EQ(back.experiment, t.experiment);
  EXPECT_EQ(back.arm, t.arm);
  EXPECT_EQ(back.seed, t.seed);
  EXPECT_TRUE(back.diverged);
  EXPECT_EQ(back.config, t.config);
  EXPECT_EQ(back.columns, t.columns);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_TRUE(std::isnan(back.rows[0][2]));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (std::isnan(t.rows[r][c])) continue;
      EXPECT_EQ(back.rows[r][c], t.rows[r][c]) << r << "," << c;
    }
  EXPECT_EQ(format_trace(back), format_trace(t));
  EXPECT_EQ(t.file_name(), "kernel-psd_psd_seed7.csv");
}

TEST(TraceFile, ReadersRejectMismatches) {
  const TraceFile t = grid_run("grid-offline", "t10", 1, {5, 4});
  const std::string good = format_trace(t);
  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  EXPECT_NO_THROW(parse_trace(good));
  EXPECT_THROW(parse_trace(replaced("schema_version: 1", "schema_version: 2")), TraceFormatError);
  EXPECT_THROW(parse_trace(replaced("greedy_return", "return")), TraceFormatError);
  EXPECT_THROW(parse_trace(replaced("# config: experiment = grid-offline", "# config: experiment = other")),
               TraceFormatError);
  EXPECT_THROW(parse_trace(replaced("# rankcollapse-trace", "# something else")), TraceFormatError);
  EXPECT_THROW(parse_trace(good + "1,2,3\n"), TraceFormatError);
  EXPECT_THROW(parse_trace(good + "1,2,3,4,5,6,x\n"), TraceFormatError);
  EXPECT_THROW(t.column("nope"), TraceFormatError);
}

// Runs ----------------------------------------------------------------------

TEST(Run, SameConfigGivesByteIdenticalFilesAcrossJobCounts) {
  const Config cfg = resolved("experiment = kernel-normal\nseeds = 1..4\n");
  const auto a = scratch_dir("jobs1");
  const auto b = scratch_dir("jobs3");
  const auto out_a = run_experiment(cfg, a, 1);
  const auto out_b = run_experiment(cfg, b, 3);
  ASSERT_EQ(out_a.files.size(), 4u);
  EXPECT_EQ(out_a.diverged, 0u);
  for (std::size_t i = 0; i < out_a.files.size(); ++i) {
    EXPECT_EQ(out_a.files[i].filename(), out_b.files[i].filename());
    EXPECT_EQ(slurp(out_a.files[i]), slurp(out_b.files[i]));
  }
}

TEST(Run, GridFilesShareOneSchema) {
  const Config cfg = resolved(tiny_grid("grid-offline"));
  const auto dir = scratch_dir("grid");
  const auto outcome = run_experiment(cfg, dir, 2);
  EXPECT_EQ(outcome.files.size(), 6u);
  const auto traces = read_trace_dir(dir);
  ASSERT_EQ(traces.size(), 6u);
  for (const auto& t : traces) {
    EXPECT_EQ(t.columns, columns_for("grid-offline"));
    EXPECT_EQ(t.config, cfg);
    EXPECT_FALSE(t.rows.empty());
  }
  // Rerunning overwrites with identical bytes.
  const std::string before = slurp(outcome.files.front());
  run_experiment(cfg, dir, 1);
  EXPECT_EQ(slurp(outcome.files.front()), before);
}

TEST(Run, EveryGridArmRuns) {
  for (const char* e : {"grid-online", "grid-penalty", "grid-ablations"}) {
    const Config cfg = resolved(tiny_grid(e) + "seeds = 1\n");
    for (const auto& arm : cfg.get_list("arms")) {
      const TraceFile t = run_arm(cfg, arm, 1);
      EXPECT_FALSE(t.rows.empty()) << e << " " << arm;
      EXPECT_FALSE(t.diverged) << e << " " << arm;
    }
  }
}

TEST(Run, DivergedRunsAreFlaggedNotFatal) {
  const Config cfg = resolved(tiny_grid("grid-offline") + "fqi.learning_rate = 1e300\narms = t200\n");
  const auto dir = scratch_dir("diverged");
  const auto outcome = run_experiment(cfg, dir, 1);
  EXPECT_EQ(outcome.runs, 2u);
  EXPECT_TRUE(outcome.all_diverged());
  for (const auto& t : read_trace_dir(dir)) EXPECT_TRUE(t.diverged);
}

TEST(Run, OutputRootPrecedence) {
  Config cfg = resolved("experiment = kernel-psd\n");
  ::setenv("RANKCOLLAPSE_OUT", "/env/root", 1);
  EXPECT_EQ(output_root("flag", cfg), fs::path("flag"));
  EXPECT_EQ(output_root("", cfg), fs::path("/env/root"));
  cfg.set("output", "from_config");
  EXPECT_EQ(output_root("", cfg), fs::path("from_config"));
  ::unsetenv("RANKCOLLAPSE_OUT");
  EXPECT_EQ(output_root("", resolved("experiment = kernel-psd\n")), fs::path("runs"));
}

// Report --------------------------------------------------------------------

TEST(Report, OnlyPresentExperimentsAreEvaluated) {
  const Config cfg = resolved("experiment = kernel-psd\nseeds = 1..3\nkernel.dim_max = 8\n");
  std::vector<TraceFile> traces;
  for (std::uint64_t s = 1; s <= 3; ++s) traces.push_back(run_arm(cfg, "psd", s));
  const Report report = evaluate_report(traces);
  ASSERT_EQ(report.criteria.size(), 14u);
  EXPECT_EQ(criterion(report, 2).verdict, Verdict::pass);
  EXPECT_EQ(criterion(report, 3).verdict, Verdict::pass);
  for (int id : {1, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14})
    EXPECT_EQ(criterion(report, id).verdict, Verdict::not_run) << id;
  EXPECT_FALSE(report.any_failed());
  EXPECT_EQ(evaluate_report({}).any_failed(), false);
}

TEST(Report, IncreasingSrankIsANegativeControl) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  // srank 2 → 3 while the new spectrum holds only 90% of its mass in the
  // top 2 values.
  auto t = synthetic("kernel-psd", "psd", 1,
                     {{1, 2, nan, 1, 0.1, 0, 0, 0, 0}, {2, 3, 0.9, 1, 0.1, 0, 0, 0, 0}});
  EXPECT_EQ(criterion(evaluate_report({t}), 2).verdict, Verdict::fail);
  // The same increase is tolerated when the old rank still captures 1 − δ.
  t.rows[1][2] = 0.995;
  EXPECT_EQ(criterion(evaluate_report({t}), 2).verdict, Verdict::pass);
  t.rows[1][5] = 1;  // one ratio increase
  EXPECT_EQ(criterion(evaluate_report({t}), 3).verdict, Verdict::fail);
}

TEST(Report, GridDirectionalsUseMediansAndMargins) {
  std::vector<TraceFile> traces;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    traces.push_back(grid_run("grid-offline", "t10", s, {50, 52}, 0.05));
    traces.push_back(grid_run("grid-offline", "t200", s, {52, 48}, 0.2, -6.0));
    traces.push_back(grid_run("grid-offline", "qstar", s, {54, 54}));
    traces.push_back(grid_run("grid-penalty", "lp", s, {56, 52}, 0.1, -5.0));
    traces.push_back(grid_run("grid-ablations", "mc", s, {50, 45}));
    traces.push_back(grid_run("grid-ablations", "fqe", s, {50, 20}));
    traces.push_back(grid_run("grid-ablations", "reinit", s, {40, 16}));
  }
  Report report = evaluate_report(traces);
  EXPECT_EQ(criterion(report, 10).verdict, Verdict::pass);
  EXPECT_DOUBLE_EQ(criterion(report, 10).margin, 1.0);
  EXPECT_EQ(criterion(report, 11).verdict, Verdict::pass);
  EXPECT_DOUBLE_EQ(criterion(report, 11).margin, 1.0);
  EXPECT_EQ(criterion(report, 12).verdict, Verdict::pass);
  EXPECT_NEAR(criterion(report, 12).margin, 0.1, 1e-12);
  EXPECT_EQ(criterion(report, 13).verdict, Verdict::pass);
  EXPECT_EQ(criterion(report, 14).verdict, Verdict::pass);

  // Penalty arm loses on return: fails even with the srank margin.
  for (auto& t : traces)
    if (t.arm == "lp") t.rows.back()[5] = -7.0;
  report = evaluate_report(traces);
  EXPECT_EQ(criterion(report, 13).verdict, Verdict::fail);
  EXPECT_TRUE(report.any_failed());

  const auto json = nlohmann::json::parse(format_report_json(report));
  EXPECT_EQ(json["criteria"].size(), 14u);
  EXPECT_EQ(json["criteria"][12]["verdict"], "fail");
  EXPECT_TRUE(json["failed"].get<bool>());
  EXPECT_TRUE(json["criteria"][0]["margin"].is_null());
}

TEST(Report, Median) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_TRUE(std::isnan(median({})));
}

// CLI -----------------------------------------------------------------------

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli");
  const auto cfg_path = dir / "psd.cfg";
  std::ofstream(cfg_path) << "experiment = kernel-psd\nseeds = 1..2\nkernel.dim_max = 6\n";
  const std::string out = (dir / "out").string();
  EXPECT_EQ(run_cli("list-experiments"), 0);
  EXPECT_EQ(run_cli("run " + cfg_path.string() + " --out " + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "kernel-psd_psd_seed2.csv"));
  EXPECT_EQ(run_cli("report " + out + " --strict"), 0);
  EXPECT_EQ(run_cli("report " + out + " --json"), 0);
  EXPECT_EQ(run_cli("run " + cfg_path.string() + " --set kernel.nope=1 --out " + out), 2);
  EXPECT_EQ(run_cli("run " + (dir / "missing.cfg").string()), 2);
  EXPECT_EQ(run_cli("bogus-command"), 2);

  const auto grid_path = dir / "grid.cfg";
  std::ofstream(grid_path) << tiny_grid("grid-offline") << "fqi.learning_rate = 1e300\narms = t200\n";
  EXPECT_EQ(run_cli("run " + grid_path.string() + " --out " + (dir / "div").string()), 3);

  // A failing criterion only changes the exit code under --strict.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto bad = synthetic("kernel-psd", "psd", 1, {{1, 2, nan, 1, 0.1, 0, 0, 0, 0}, {2, 3, 0.9, 1, 0.1, 0, 0, 0, 0}});
  const auto bad_dir = dir / "bad";
  write_trace(bad, bad_dir);
  EXPECT_EQ(run_cli("report " + bad_dir.string()), 0);
  EXPECT_EQ(run_cli("report " + bad_dir.string() + " --strict"), 4);
}
