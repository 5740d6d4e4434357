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

#include "rankcollapse/nfqi/fqi.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "rankcollapse/linalg/svd.hpp"
#include "rankcollapse/nfqi/penalty.hpp"

namespace rankcollapse::nfqi {

std::string to_string(BackupKind kind) {
  switch (kind) {
    case BackupKind::hard_max: return "hard_max";
    case BackupKind::soft: return "soft";
    case BackupKind::evaluation: return "evaluation";
    case BackupKind::monte_carlo: return "monte_carlo";
    case BackupKind::supervised_qstar: return "supervised_qstar";
  }
  return "unknown";
}

BackupKind backup_kind_from_string(const std::string& name) {
  for (BackupKind k : {BackupKind::hard_max, BackupKind::soft, BackupKind::evaluation, BackupKind::monte_carlo,
                       BackupKind::supervised_qstar})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown backup '" + name + "'");
}

double soft_max_value(std::span<const double> q, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("soft backup: temperature must be positive");
  const double top = *std::max_element(q.begin(), q.end());
  double sum = 0.0;
  for (double x : q) sum += std::exp((x - top) / temperature);
  return top + temperature * std::log(sum);
}

namespace {

void require_oracles(const Backup& backup, const TargetOracles& oracles) {
  if (backup.kind == BackupKind::evaluation && oracles.evaluation_policy == nullptr)
    throw ConfigError("evaluation backup requires an evaluation policy");
  if (backup.kind == BackupKind::monte_carlo && oracles.mc_returns == nullptr)
    throw ConfigError("monte_carlo backup requires precomputed Monte-Carlo returns");
  if (backup.kind == BackupKind::supervised_qstar && oracles.qstar == nullptr)
    throw ConfigError("supervised_qstar backup requires a Q* table");
}

double state_value(std::span<const double> q, std::size_t s, const Backup& backup, const TargetOracles& oracles) {
  switch (backup.kind) {
    case BackupKind::hard_max: return *std::max_element(q.begin(), q.end());
    case BackupKind::soft: return soft_max_value(q, backup.temperature);
    case BackupKind::evaluation: return linalg::dot(oracles.evaluation_policy->row(s), q);
    default: break;
  }
  return 0.0;
}

}  // namespace

Vector td_targets(const Matrix& next_q, std::span<const Transition> batch, double discount, const Backup& backup,
                  const TargetOracles& oracles) {
  require_oracles(backup, oracles);
  const std::size_t n_actions = next_q.cols();
  Vector y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = batch[i];
    const std::size_t pair = t.state * n_actions + t.action;
    if (backup.kind == BackupKind::monte_carlo) {
      y[i] = (*oracles.mc_returns)[pair];
    } else if (backup.kind == BackupKind::supervised_qstar) {
      y[i] = (*oracles.qstar)[pair];
    } else {
      y[i] = t.reward + discount * state_value(next_q.row(t.next_state), t.next_state, backup, oracles);
    }
  }
  return y;
}

Vector td_targets(const MlpQNetwork& target_net, const Matrix& state_features, std::span<const Transition> batch,
                  double discount, const Backup& backup, const TargetOracles& oracles) {
  return td_targets(target_net.q_values(state_features), batch, discount, backup, oracles);
}

namespace {

// Ridge least squares through the SVD, which stays well posed when the
// features are rank deficient.
double ridge_fit_sse(const Matrix& design, std::span<const double> q) {
  if (design.rows() != q.size()) throw linalg::DimensionError("qstar_fit_error: one target per feature row");
  const linalg::SingularSpectrum spec = linalg::svd(design);
  Vector fitted(q.size(), 0.0);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double s = spec.sigma[k];
    double proj = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) proj += spec.left(i, k) * q[i];
    const double shrink = s * s / (s * s + kQstarFitRidge);
    for (std::size_t i = 0; i < q.size(); ++i) fitted[i] += shrink * proj * spec.left(i, k);
  }
  double se = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) se += (fitted[i] - q[i]) * (fitted[i] - q[i]);
  return se;
}

}  // namespace

double qstar_fit_error(const Matrix& pair_features, std::span<const double> q) {
  return std::sqrt(ridge_fit_sse(pair_features, q) / static_cast<double>(q.size()));
}

double qstar_fit_error_per_action(const Matrix& state_features, std::span<const double> q, std::size_t n_actions) {
  const std::size_t n = state_features.rows();
  if (q.size() != n * n_actions) throw linalg::DimensionError("qstar_fit_error_per_action: q must be n_states x n_actions");
  double se = 0.0;
  Vector column(n);
  for (std::size_t a = 0; a < n_actions; ++a) {
    for (std::size_t s = 0; s < n; ++s) column[s] = q[s * n_actions + a];
    se += ridge_fit_sse(state_features, column);
  }
  return std::sqrt(se / static_cast<double>(q.size()));
}

void TrainConfig::validate() const {
  if (mode == TrainMode::offline && grad_steps_per_iteration == 0)
    throw ConfigError("grad_steps_per_iteration must be >= 1");
  if (mode == TrainMode::online && (env_steps_per_iteration == 0 || grad_steps_per_env_step == 0))
    throw ConfigError("online mode needs env_steps_per_iteration and grad_steps_per_env_step >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(penalty_alpha >= 0.0)) throw ConfigError("penalty_alpha must be >= 0");
  if (backup.kind == BackupKind::soft && !(backup.temperature > 0.0)) throw ConfigError("soft temperature must be positive");
  if (srank_batch == 0) throw ConfigError("srank_batch must be >= 1");
  if (!(srank_delta > 0.0 && srank_delta < 1.0)) throw ConfigError("srank_delta must lie in (0, 1)");
  if (trace_every == 0) throw ConfigError("trace_every must be >= 1");
  if (hidden.empty() || std::find(hidden.begin(), hidden.end(), 0u) != hidden.end())
    throw ConfigError("hidden widths must be positive");
  if (buffer_capacity == 0) throw ConfigError("buffer_capacity must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  if (episode_length == 0) throw ConfigError("episode_length must be >= 1");
}

std::size_t feature_srank(const Matrix& features, double delta) {
  const auto sigma = linalg::singular_values(features);
  if (!(sigma.front() > 0.0)) return 0;
  return linalg::srank(sigma, delta);
}

double greedy_return(const MlpQNetwork& net, const TrainingProblem& problem) {
  const Matrix q = net.q_values(problem.state_features);
  return grid::policy_return(problem.mdp, grid::greedy_policy(problem.mdp, q.entries()));
}

namespace {

// Stream layout per seed: init, training (batches and acting), tracing,
// re-initialization.
struct Streams {
  linalg::Rng init;
  linalg::Rng train;
  linalg::Rng trace;
  linalg::Rng reinit;

  explicit Streams(std::uint64_t seed)
      : Streams(linalg::Rng(seed)) {}

 private:
  explicit Streams(linalg::Rng master)
      : init(master.split()), train(master.split()), trace(master.split()), reinit(master.split()) {}
};

Matrix gather_inputs(const Matrix& state_features, std::span<const Transition> batch) {
  Matrix x(batch.size(), state_features.cols());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto src = state_features.row(batch[i].state);
    std::copy(src.begin(), src.end(), x.row(i).begin());
  }
  return x;
}

class Trainer {
 public:
  Trainer(const MlpQNetwork& initial, const TrainingProblem& problem, const TrainConfig& cfg, std::uint64_t seed)
      : problem_(problem), cfg_(cfg), streams_(seed), net_(initial),
        optimizer_(net_, AdamConfig{cfg.learning_rate}) {}

  TrainResult run_offline(std::span<const Transition> dataset) {
    if (dataset.empty()) throw ConfigError("offline training requires a non-empty dataset");
    for (std::size_t k = 1; k <= cfg_.fitting_iterations; ++k) {
      begin_iteration(k);
      for (std::size_t t = 0; t < cfg_.grad_steps_per_iteration; ++t)
        if (!gradient_step(dataset)) return finish();
      end_iteration(k, dataset);
    }
    return finish();
  }

  TrainResult run_online() {
    const TabularMdp& mdp = problem_.mdp;
    std::size_t state = mdp.sample_start(streams_.train);
    std::size_t episode_step = 0;
    for (std::size_t k = 1; k <= cfg_.fitting_iterations; ++k) {
      begin_iteration(k);
      for (std::size_t e = 0; e < cfg_.env_steps_per_iteration; ++e) {
        const std::size_t action = act(state);
        const std::size_t next = mdp.sample_next(state, action, streams_.train);
        if (buffer_.size() == cfg_.buffer_capacity) buffer_.pop_front();
        buffer_.push_back({state, action, mdp.reward(state, action), next});
        state = next;
        if (++episode_step == cfg_.episode_length) {
          state = mdp.sample_start(streams_.train);
          episode_step = 0;
        }
        if (buffer_.size() < cfg_.batch_size) continue;
        for (std::size_t n = 0; n < cfg_.grad_steps_per_env_step; ++n)
          if (!gradient_step(buffer_)) return finish();
      }
      end_iteration(k, buffer_);
    }
    return finish();
  }

 private:
  void begin_iteration(std::size_t k) {
    frozen_q_ = net_.q_values(problem_.state_features);
    if (cfg_.reinit_each_iteration && k > 1) {
      net_ = MlpQNetwork::he_init(net_.input_dim(), cfg_.hidden, net_.n_actions(), streams_.reinit);
      optimizer_ = AdamOptimizer(net_, AdamConfig{cfg_.learning_rate});
    }
  }

  std::size_t act(std::size_t state) {
    if (streams_.train.bernoulli(cfg_.epsilon)) return streams_.train.below(problem_.mdp.n_actions());
    Matrix x(1, problem_.state_features.cols());
    const auto src = problem_.state_features.row(state);
    std::copy(src.begin(), src.end(), x.row(0).begin());
    const Matrix q = net_.q_values(x);
    const auto row = q.row(0);
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }

  // Pool is a span over the dataset or the FIFO buffer itself.
  template <class Pool>
  bool gradient_step(const Pool& pool) {
    batch_.resize(cfg_.batch_size);
    for (auto& t : batch_) t = pool[streams_.train.below(pool.size())];
    const ForwardCache cache = net_.forward(gather_inputs(problem_.state_features, batch_));
    const Vector y = td_targets(frozen_q_, batch_, problem_.mdp.discount(), cfg_.backup, problem_.oracles);
    const double inv_b = 1.0 / static_cast<double>(batch_.size());
    Matrix d_q(cache.q.rows(), cache.q.cols());
    double loss = 0.0;
    for (std::size_t i = 0; i < batch_.size(); ++i) {
      const double r = cache.q(i, batch_[i].action) - y[i];
      loss += r * r * inv_b;
      d_q(i, batch_[i].action) = 2.0 * r * inv_b;
    }
    ++global_step_;
    Matrix d_features;
    if (cfg_.penalty_alpha > 0.0) {
      PenaltyValue pen = lp_penalty(cache.features());
      loss += cfg_.penalty_alpha * pen.value;
      d_features = std::move(pen.gradient);
      d_features *= cfg_.penalty_alpha;
    }
    if (!std::isfinite(loss)) return diverge();
    MlpGradient grad = net_.backward(cache, d_q, d_features);
    optimizer_.step(net_, grad);
    if (!net_.all_finite()) return diverge();
    return true;
  }

  bool diverge() {
    trace_.diverged = true;
    trace_.diverged_at = global_step_;
    return false;
  }

  template <class Pool>
  void end_iteration(std::size_t k, const Pool& pool) {
    if (pool.empty() || (k % cfg_.trace_every != 0 && k != cfg_.fitting_iterations)) return;
    const std::size_t m = std::min(cfg_.srank_batch, pool.size());
    std::vector<Transition> sample(m);
    for (auto& t : sample) t = pool[streams_.trace.below(pool.size())];
    const ForwardCache cache = net_.forward(gather_inputs(problem_.state_features, sample));
    const Matrix current_q = net_.q_values(problem_.state_features);
    // TD error against targets built from the current network, i.e. the
    // Bellman error of Q_k on the sample.
    const Vector y = td_targets(current_q, sample, problem_.mdp.discount(), cfg_.backup, problem_.oracles);
    TraceRow row;
    row.iteration = k;
    row.step = global_step_;
    row.srank = feature_srank(cache.features(), cfg_.srank_delta);
    for (std::size_t i = 0; i < m; ++i) {
      const double r = cache.q(i, sample[i].action) - y[i];
      row.td_error += r * r / static_cast<double>(m);
    }
    row.qstar_fit_error = problem_.oracles.qstar == nullptr
                              ? std::numeric_limits<double>::quiet_NaN()
                              : qstar_fit_error_per_action(features_of_states(), *problem_.oracles.qstar,
                                                           problem_.mdp.n_actions());
    row.greedy_return =
        grid::policy_return(problem_.mdp, grid::greedy_policy(problem_.mdp, current_q.entries()));
    row.penalty = lp_penalty_value(cache.features());
    if (!std::isfinite(row.td_error)) {
      diverge();
      return;
    }
    trace_.rows.push_back(row);
  }

  Matrix features_of_states() const { return net_.forward(problem_.state_features).features(); }

  TrainResult finish() { return TrainResult{std::move(trace_), std::move(net_)}; }

  const TrainingProblem& problem_;
  const TrainConfig& cfg_;
  Streams streams_;
  MlpQNetwork net_;
  AdamOptimizer optimizer_;
  Matrix frozen_q_;
  std::vector<Transition> batch_;
  std::deque<Transition> buffer_;
  RankTrace trace_;
  std::size_t global_step_ = 0;
};

}  // namespace

MlpQNetwork initial_network(const TrainingProblem& problem, const TrainConfig& cfg, std::uint64_t seed) {
  Streams streams(seed);
  return MlpQNetwork::he_init(problem.state_features.cols(), cfg.hidden, problem.mdp.n_actions(), streams.init);
}

TrainResult fqi_train(const MlpQNetwork& initial, const TrainingProblem& problem, std::span<const Transition> dataset,
                      const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  require_oracles(cfg.backup, problem.oracles);
  if (problem.state_features.rows() != problem.mdp.n_states())
    throw linalg::DimensionError("fqi_train: one feature row per state required");
  if (initial.input_dim() != problem.state_features.cols() || initial.n_actions() != problem.mdp.n_actions())
    throw linalg::DimensionError("fqi_train: network shape does not match the problem");
  Trainer trainer(initial, problem, cfg, seed);
  if (cfg.mode == TrainMode::offline) return trainer.run_offline(dataset);
  return trainer.run_online();
}

}  // namespace rankcollapse::nfqi
