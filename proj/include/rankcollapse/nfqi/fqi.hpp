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
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankcollapse/grid/gridworld.hpp"
#include "rankcollapse/grid/mdp.hpp"
#include "rankcollapse/nfqi/mlp.hpp"

namespace rankcollapse::nfqi {

using grid::Policy;
using grid::TabularMdp;
using grid::Transition;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class BackupKind { hard_max, soft, evaluation, monte_carlo, supervised_qstar };

struct Backup {
  BackupKind kind = BackupKind::soft;
  double temperature = 0.1;  // soft only

  bool bootstraps() const { return kind == BackupKind::hard_max || kind == BackupKind::soft || kind == BackupKind::evaluation; }
};

std::string to_string(BackupKind kind);
// Throws ConfigError for unknown names.
BackupKind backup_kind_from_string(const std::string& name);

// Tables indexed like TabularMdp Q tables (s·n_actions + a).
struct TargetOracles {
  const Policy* evaluation_policy = nullptr;  // evaluation backup
  const Vector* mc_returns = nullptr;         // monte_carlo backup
  const Vector* qstar = nullptr;              // supervised_qstar backup and the Q*-fit probe
};

// r + γ·V̄(s') with V̄ from the frozen table `next_q` (n_states × n_actions),
// or the oracle value for non-bootstrapped modes. Throws ConfigError when the
// selected mode's oracle is missing.
Vector td_targets(const Matrix& next_q, std::span<const Transition> batch, double discount, const Backup& backup,
                  const TargetOracles& oracles);

// Convenience form that evaluates the target network on the state features.
Vector td_targets(const MlpQNetwork& target_net, const Matrix& state_features, std::span<const Transition> batch,
                  double discount, const Backup& backup, const TargetOracles& oracles);

// τ·log Σ exp(q/τ), shifted by the maximum for stability.
double soft_max_value(std::span<const double> q, double temperature);

// RMS error of the best ridge (1e−8) linear read-out of q from the rows of
// `pair_features`.
double qstar_fit_error(const Matrix& pair_features, std::span<const double> q);

// Same probe for a per-action read-out on shared state features, i.e. the
// design with rows e_a ⊗ Φ(s). Block-diagonal, so solved per action.
double qstar_fit_error_per_action(const Matrix& state_features, std::span<const double> q, std::size_t n_actions);

inline constexpr double kQstarFitRidge = 1e-8;

enum class TrainMode { offline, online };

struct TrainConfig {
  TrainMode mode = TrainMode::offline;
  std::size_t fitting_iterations = 100;       // K
  std::size_t grad_steps_per_iteration = 200;  // T, offline
  std::size_t env_steps_per_iteration = 100;   // online
  std::size_t grad_steps_per_env_step = 1;     // n, online
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  Backup backup;
  double penalty_alpha = 0.0;
  bool reinit_each_iteration = false;
  std::size_t srank_batch = 2048;
  double srank_delta = 0.01;
  std::size_t trace_every = 1;  // fitting iterations between trace rows
  std::vector<std::size_t> hidden{64, 64};
  std::size_t buffer_capacity = 10000;
  double epsilon = 0.1;               // online acting
  std::size_t episode_length = 50;    // online acting

  void validate() const;
};

struct TraceRow {
  std::size_t iteration = 0;
  std::size_t step = 0;  // gradient steps so far
  std::size_t srank = 0;
  double td_error = 0.0;
  double qstar_fit_error = 0.0;  // NaN without a Q* oracle
  double greedy_return = 0.0;
  double penalty = 0.0;  // L_p on the srank batch
};

struct RankTrace {
  std::vector<TraceRow> rows;
  bool diverged = false;
  std::size_t diverged_at = 0;  // gradient step
};

struct TrainingProblem {
  const TabularMdp& mdp;
  const Matrix& state_features;  // n_states × input_dim
  TargetOracles oracles;
};

struct TrainResult {
  RankTrace trace;
  MlpQNetwork network;
};

// Neural FQI. Each fitting iteration freezes a target table from the current
// network, then takes T Adam steps (offline) or interleaves acting and n
// steps per environment step (online, FIFO buffer). The srank batch is
// min(srank_batch, pool) records drawn i.i.d. from the training pool with a
// dedicated stream, so tracing never perturbs training.
TrainResult fqi_train(const MlpQNetwork& initial, const TrainingProblem& problem,
                      std::span<const Transition> dataset, const TrainConfig& cfg, std::uint64_t seed);

// Fresh network for the problem, drawn from the seed's init stream.
MlpQNetwork initial_network(const TrainingProblem& problem, const TrainConfig& cfg, std::uint64_t seed);

// srank of the feature batch, 0 for an all-zero batch.
std::size_t feature_srank(const Matrix& features, double delta);

// Exact discounted return of the greedy policy of `net` from the start
// distribution.
double greedy_return(const MlpQNetwork& net, const TrainingProblem& problem);

}  // namespace rankcollapse::nfqi
