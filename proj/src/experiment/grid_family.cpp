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

#include <stdexcept>
#include <utility>

#include "families.hpp"
#include "rankcollapse/grid/gridworld.hpp"
#include "rankcollapse/grid/mdp.hpp"
#include "rankcollapse/nfqi/fqi.hpp"

namespace rankcollapse::experiment::detail {

namespace {

grid::GridSpec grid_spec(const Config& cfg) {
  grid::GridSpec spec;
  spec.side = static_cast<int>(cfg.get_int("grid.side"));
  spec.wall_prob = cfg.get_double("grid.wall_prob");
  spec.discount = cfg.get_double("grid.discount");
  spec.start = {0, 0};
  spec.goal = {spec.side - 1, spec.side - 1};
  spec.feature_dim = cfg.get_size("grid.feature_dim");
  spec.smoothing_radius = static_cast<int>(cfg.get_int("grid.smoothing_radius"));
  spec.seed = static_cast<std::uint64_t>(cfg.get_int("grid.seed"));
  return spec;
}

// Shared settings from the fqi.* keys, then the arm preset on top.
nfqi::TrainConfig train_config(const Config& cfg, const std::string& arm) {
  nfqi::TrainConfig tc;
  tc.fitting_iterations = cfg.get_size("fqi.iterations");
  tc.grad_steps_per_iteration = cfg.get_size("fqi.long_steps");
  tc.batch_size = cfg.get_size("fqi.batch_size");
  tc.learning_rate = cfg.get_double("fqi.learning_rate");
  tc.backup.kind = nfqi::backup_kind_from_string(cfg.get_string("fqi.backup"));
  tc.backup.temperature = cfg.get_double("fqi.temperature");
  tc.srank_batch = cfg.get_size("fqi.srank_batch");
  tc.srank_delta = cfg.get_double("fqi.delta");
  tc.trace_every = cfg.get_size("fqi.trace_every");
  tc.hidden = cfg.get_sizes("fqi.hidden");

  if (arm == "t10") {
    tc.grad_steps_per_iteration = cfg.get_size("fqi.short_steps");
  } else if (arm == "qstar") {
    tc.backup.kind = nfqi::BackupKind::supervised_qstar;
  } else if (arm == "lp") {
    tc.penalty_alpha = cfg.get_double("penalty.alpha");
  } else if (arm == "mc") {
    tc.backup.kind = nfqi::BackupKind::monte_carlo;
  } else if (arm == "fqe") {
    tc.backup.kind = nfqi::BackupKind::evaluation;
  } else if (arm == "reinit") {
    tc.reinit_each_iteration = true;
  } else if (arm == "n1" || arm == "n4") {
    tc.mode = nfqi::TrainMode::online;
    tc.grad_steps_per_env_step = arm == "n1" ? 1 : 4;
    tc.fitting_iterations = cfg.get_size("online.iterations");
    tc.env_steps_per_iteration = cfg.get_size("online.env_steps_per_iteration");
    tc.buffer_capacity = cfg.get_size("online.buffer_capacity");
    tc.epsilon = cfg.get_double("online.epsilon");
    tc.episode_length = cfg.get_size("online.episode_length");
  }
  return tc;
}

}  // namespace

void check_grid(const Config& cfg) {
  if (!cfg.contains("grid.side")) return;
  try {
    grid_spec(cfg).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("grid", e.what());
  }
  for (const auto& arm : cfg.get_list("arms")) {
    try {
      train_config(cfg, arm).validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("fqi", e.what());
    }
  }
  if (cfg.get_size("dataset.size") == 0) throw ConfigError("dataset.size", "must be >= 1");
  if (cfg.get_size("mc.rollouts") == 0) throw ConfigError("mc.rollouts", "must be >= 1");
}

// The environment is fixed by grid.seed; the run seed drives the dataset,
// the Monte-Carlo targets and the network, so arms sharing a seed are paired.
TraceFile grid_trace(const Config& cfg, const std::string& arm, std::uint64_t seed) {
  const grid::Gridworld world = grid::build_gridworld(grid_spec(cfg));
  const grid::TabularMdp& mdp = world.mdp;
  linalg::Rng streams(seed);
  const std::uint64_t data_seed = streams.next_u64();
  const std::uint64_t mc_seed = streams.next_u64();

  const auto optimal = grid::value_iteration(mdp, 1e-10);
  const grid::Policy uniform = grid::uniform_policy(mdp);
  grid::BehaviorSpec behavior;
  behavior.episode_length = cfg.get_size("dataset.episode_length");
  const auto dataset = grid::collect_dataset(mdp, world.features, behavior, cfg.get_size("dataset.size"), data_seed);

  const nfqi::TrainConfig tc = train_config(cfg, arm);
  linalg::Vector mc_returns;
  if (tc.backup.kind == nfqi::BackupKind::monte_carlo) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t s = 0; s < mdp.n_states(); ++s)
      for (std::size_t a = 0; a < mdp.n_actions(); ++a) pairs.emplace_back(s, a);
    const auto estimates = grid::monte_carlo_targets(mdp, uniform, pairs, grid::truncation_horizon(mdp.discount()),
                                                     cfg.get_size("mc.rollouts"), mc_seed);
    for (const auto& e : estimates) mc_returns.push_back(e.mean);
  }

  const nfqi::TrainingProblem problem{mdp, world.features, {&uniform, mc_returns.empty() ? nullptr : &mc_returns, &optimal.q}};
  const auto net = nfqi::initial_network(problem, tc, seed);
  const auto result = nfqi::fqi_train(net, problem, dataset.records, tc, seed);

  TraceFile trace;
  trace.columns = columns_for("grid-offline");
  trace.diverged = result.trace.diverged;
  for (const auto& row : result.trace.rows)
    trace.rows.push_back({static_cast<double>(row.iteration), static_cast<double>(row.step),
                          static_cast<double>(row.srank), row.td_error, row.qstar_fit_error, row.greedy_return,
                          row.penalty});
  return trace;
}

}  // namespace rankcollapse::experiment::detail
