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
#include <span>
#include <utility>
#include <vector>

#include "rankcollapse/linalg/matrix.hpp"
#include "rankcollapse/linalg/rng.hpp"

namespace rankcollapse::grid {

using linalg::Matrix;
using linalg::Vector;

struct Outcome {
  std::size_t next = 0;
  double prob = 0.0;
};

// Finite MDP with sparse transitions indexed by (s, a) → s·n_actions + a.
// Q tables use the same flat layout.
class TabularMdp {
 public:
  TabularMdp(std::size_t n_states, std::size_t n_actions, double discount);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t n_pairs() const { return n_states_ * n_actions_; }
  double discount() const { return discount_; }
  std::size_t pair(std::size_t s, std::size_t a) const { return s * n_actions_ + a; }

  const std::vector<Outcome>& outcomes(std::size_t s, std::size_t a) const { return transitions_[pair(s, a)]; }
  double reward(std::size_t s, std::size_t a) const { return rewards_[pair(s, a)]; }
  const Vector& rewards() const { return rewards_; }
  const Vector& start_distribution() const { return start_; }

  void set_transition(std::size_t s, std::size_t a, std::vector<Outcome> outcomes);
  void set_reward(std::size_t s, std::size_t a, double r) { rewards_[pair(s, a)] = r; }
  void set_start_distribution(Vector start) { start_ = std::move(start); }

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  std::size_t sample_next(std::size_t s, std::size_t a, linalg::Rng& rng) const;
  std::size_t sample_start(linalg::Rng& rng) const;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  double discount_;
  std::vector<std::vector<Outcome>> transitions_;
  Vector rewards_;
  Vector start_;
};

// Row-stochastic n_states × n_actions table.
using Policy = Matrix;

Policy uniform_policy(const TabularMdp& mdp);
// Deterministic argmax policy; ties go to the lowest action index.
Policy greedy_policy(const TabularMdp& mdp, std::span<const double> q);
Policy epsilon_greedy_policy(const TabularMdp& mdp, std::span<const double> q, double epsilon);

struct ValueIterationResult {
  Vector q;
  std::vector<double> gaps;  // sup-norm change per sweep
  double bellman_residual = 0.0;
};

// Iterates the optimality operator until γ·gap <= tol, which bounds the
// Bellman residual of the returned table by tol.
ValueIterationResult value_iteration(const TabularMdp& mdp, double tol, std::size_t max_sweeps = 100000);

double bellman_optimality_residual(const TabularMdp& mdp, std::span<const double> q);
double bellman_evaluation_residual(const TabularMdp& mdp, const Policy& policy, std::span<const double> q);

// Exact Q^π from the linear system on state values, then Q = R + γ·P·V.
Vector policy_evaluation(const TabularMdp& mdp, const Policy& policy);

// Expected discounted return of the policy from the start distribution.
double policy_return(const TabularMdp& mdp, const Policy& policy);

struct ReturnEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Average discounted return over n_rollouts rollouts of `horizon` steps that
// start with (s, a) and then follow the policy. Requires γ^horizon <= 1e-6.
std::vector<ReturnEstimate> monte_carlo_targets(const TabularMdp& mdp, const Policy& policy,
                                                std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                                std::size_t horizon, std::size_t n_rollouts,
                                                std::uint64_t seed);

// Smallest horizon with γ^horizon <= 1e-6.
std::size_t truncation_horizon(double discount);

// Random MDP with `branching` successors per pair and uniform rewards in
// [-1, 0]; used as a stochastic test bed.
TabularMdp random_mdp(std::size_t n_states, std::size_t n_actions, std::size_t branching,
                      double discount, std::uint64_t seed);

}  // namespace rankcollapse::grid
