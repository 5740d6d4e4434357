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

#include "rankcollapse/grid/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rankcollapse/linalg/solve.hpp"

namespace rankcollapse::grid {

TabularMdp::TabularMdp(std::size_t n_states, std::size_t n_actions, double discount)
    : n_states_(n_states),
      n_actions_(n_actions),
      discount_(discount),
      transitions_(n_states * n_actions),
      rewards_(n_states * n_actions, 0.0),
      start_(n_states, n_states > 0 ? 1.0 / static_cast<double>(n_states) : 0.0) {
  if (n_states == 0 || n_actions == 0) throw std::invalid_argument("TabularMdp: empty state or action set");
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("TabularMdp: discount must lie in [0, 1)");
}

void TabularMdp::set_transition(std::size_t s, std::size_t a, std::vector<Outcome> outcomes) {
  if (s >= n_states_ || a >= n_actions_) throw std::out_of_range("TabularMdp::set_transition");
  transitions_[pair(s, a)] = std::move(outcomes);
}

void TabularMdp::validate() const {
  for (std::size_t s = 0; s < n_states_; ++s) {
    for (std::size_t a = 0; a < n_actions_; ++a) {
      double sum = 0.0;
      for (const auto& o : outcomes(s, a)) {
        if (o.next >= n_states_ || !(o.prob >= 0.0)) {
          std::ostringstream os;
          os << "TabularMdp: invalid outcome at (" << s << ", " << a << ")";
          throw std::invalid_argument(os.str());
        }
        sum += o.prob;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "TabularMdp: transition at (" << s << ", " << a << ") sums to " << sum;
        throw std::invalid_argument(os.str());
      }
      if (!std::isfinite(reward(s, a))) throw std::invalid_argument("TabularMdp: non-finite reward");
    }
  }
  double total = 0.0;
  for (double p : start_) {
    if (!(p >= 0.0)) throw std::invalid_argument("TabularMdp: negative start probability");
    total += p;
  }
  if (start_.size() != n_states_ || std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("TabularMdp: start distribution must sum to 1");
}

namespace {

std::size_t sample_index(std::span<const double> probs, linalg::Rng& rng) {
  double u = rng.uniform();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  // Rounding leftovers land on the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

void check_q(const TabularMdp& mdp, std::span<const double> q) {
  if (q.size() != mdp.n_pairs()) throw linalg::DimensionError("Q table size must equal n_states * n_actions");
}

void check_policy(const TabularMdp& mdp, const Policy& policy) {
  if (policy.rows() != mdp.n_states() || policy.cols() != mdp.n_actions())
    throw linalg::DimensionError("policy must be n_states x n_actions");
  for (std::size_t s = 0; s < policy.rows(); ++s) {
    double sum = 0.0;
    for (double p : policy.row(s)) {
      if (p < 0.0) throw std::invalid_argument("policy has a negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("policy rows must sum to 1");
  }
}

double max_q(std::span<const double> q, std::size_t s, std::size_t n_actions) {
  const auto row = q.subspan(s * n_actions, n_actions);
  return *std::max_element(row.begin(), row.end());
}

}  // namespace

std::size_t TabularMdp::sample_next(std::size_t s, std::size_t a, linalg::Rng& rng) const {
  const auto& outs = outcomes(s, a);
  if (outs.size() == 1) return outs.front().next;
  double u = rng.uniform();
  for (const auto& o : outs) {
    if (u < o.prob) return o.next;
    u -= o.prob;
  }
  return outs.back().next;
}

std::size_t TabularMdp::sample_start(linalg::Rng& rng) const { return sample_index(start_, rng); }

Policy uniform_policy(const TabularMdp& mdp) {
  return Policy(mdp.n_states(), mdp.n_actions(), 1.0 / static_cast<double>(mdp.n_actions()));
}

Policy greedy_policy(const TabularMdp& mdp, std::span<const double> q) {
  check_q(mdp, q);
  Policy pi(mdp.n_states(), mdp.n_actions());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    const auto row = q.subspan(s * mdp.n_actions(), mdp.n_actions());
    pi(s, static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin())) = 1.0;
  }
  return pi;
}

Policy epsilon_greedy_policy(const TabularMdp& mdp, std::span<const double> q, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  Policy pi = greedy_policy(mdp, q);
  const double floor = epsilon / static_cast<double>(mdp.n_actions());
  for (std::size_t s = 0; s < pi.rows(); ++s)
    for (std::size_t a = 0; a < pi.cols(); ++a) pi(s, a) = (1.0 - epsilon) * pi(s, a) + floor;
  return pi;
}

double bellman_optimality_residual(const TabularMdp& mdp, std::span<const double> q) {
  check_q(mdp, q);
  double worst = 0.0;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      double backup = mdp.reward(s, a);
      for (const auto& o : mdp.outcomes(s, a)) backup += mdp.discount() * o.prob * max_q(q, o.next, mdp.n_actions());
      worst = std::max(worst, std::abs(q[mdp.pair(s, a)] - backup));
    }
  }
  return worst;
}

double bellman_evaluation_residual(const TabularMdp& mdp, const Policy& policy, std::span<const double> q) {
  check_q(mdp, q);
  check_policy(mdp, policy);
  double worst = 0.0;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      double backup = mdp.reward(s, a);
      for (const auto& o : mdp.outcomes(s, a)) {
        double v = 0.0;
        for (std::size_t b = 0; b < mdp.n_actions(); ++b) v += policy(o.next, b) * q[mdp.pair(o.next, b)];
        backup += mdp.discount() * o.prob * v;
      }
      worst = std::max(worst, std::abs(q[mdp.pair(s, a)] - backup));
    }
  }
  return worst;
}

ValueIterationResult value_iteration(const TabularMdp& mdp, double tol, std::size_t max_sweeps) {
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
  ValueIterationResult out;
  out.q.assign(mdp.n_pairs(), 0.0);
  Vector next(mdp.n_pairs());
  Vector v(mdp.n_states());
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t s = 0; s < mdp.n_states(); ++s) v[s] = max_q(out.q, s, mdp.n_actions());
    double gap = 0.0;
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
      for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
        double backup = mdp.reward(s, a);
        for (const auto& o : mdp.outcomes(s, a)) backup += mdp.discount() * o.prob * v[o.next];
        const std::size_t i = mdp.pair(s, a);
        next[i] = backup;
        gap = std::max(gap, std::abs(backup - out.q[i]));
      }
    }
    out.q.swap(next);
    out.gaps.push_back(gap);
    if (mdp.discount() * gap <= tol) break;
  }
  out.bellman_residual = bellman_optimality_residual(mdp, out.q);
  return out;
}

Vector policy_evaluation(const TabularMdp& mdp, const Policy& policy) {
  check_policy(mdp, policy);
  const std::size_t n = mdp.n_states();
  Matrix lhs = Matrix::identity(n);
  Vector r_pi(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      const double p = policy(s, a);
      if (p == 0.0) continue;
      r_pi[s] += p * mdp.reward(s, a);
      for (const auto& o : mdp.outcomes(s, a)) lhs(s, o.next) -= mdp.discount() * p * o.prob;
    }
  }
  const Vector v = linalg::solve(lhs, r_pi);
  Vector q(mdp.n_pairs());
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      double backup = mdp.reward(s, a);
      for (const auto& o : mdp.outcomes(s, a)) backup += mdp.discount() * o.prob * v[o.next];
      q[mdp.pair(s, a)] = backup;
    }
  }
  return q;
}

double policy_return(const TabularMdp& mdp, const Policy& policy) {
  const Vector q = policy_evaluation(mdp, policy);
  double total = 0.0;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    const double w = mdp.start_distribution()[s];
    if (w == 0.0) continue;
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) total += w * policy(s, a) * q[mdp.pair(s, a)];
  }
  return total;
}

std::size_t truncation_horizon(double discount) {
  if (discount <= 0.0) return 1;
  return static_cast<std::size_t>(std::ceil(std::log(1e-6) / std::log(discount)));
}

std::vector<ReturnEstimate> monte_carlo_targets(const TabularMdp& mdp, const Policy& policy,
                                                std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                                std::size_t horizon, std::size_t n_rollouts,
                                                std::uint64_t seed) {
  check_policy(mdp, policy);
  if (std::pow(mdp.discount(), static_cast<double>(horizon)) > 1e-6)
    throw std::invalid_argument("monte_carlo_targets: horizon too short for 1e-6 truncation bias");
  if (n_rollouts == 0) throw std::invalid_argument("monte_carlo_targets: n_rollouts must be >= 1");
  linalg::Rng rng(seed);
  std::vector<ReturnEstimate> out;
  out.reserve(pairs.size());
  for (const auto& [s0, a0] : pairs) {
    if (s0 >= mdp.n_states() || a0 >= mdp.n_actions()) throw std::out_of_range("monte_carlo_targets: pair");
    // Welford accumulation; the naive sum-of-squares form cancels to
    // spurious nonzero variance on deterministic returns.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t roll = 0; roll < n_rollouts; ++roll) {
      std::size_t s = s0;
      std::size_t a = a0;
      double ret = 0.0;
      double weight = 1.0;
      for (std::size_t t = 0; t < horizon; ++t) {
        ret += weight * mdp.reward(s, a);
        weight *= mdp.discount();
        s = mdp.sample_next(s, a, rng);
        a = sample_index(policy.row(s), rng);
      }
      const double diff = ret - mean;
      mean += diff / static_cast<double>(roll + 1);
      m2 += diff * (ret - mean);
    }
    const double n = static_cast<double>(n_rollouts);
    ReturnEstimate est;
    est.mean = mean;
    if (n_rollouts > 1) est.std_error = std::sqrt(m2 / (n - 1.0) / n);
    out.push_back(est);
  }
  return out;
}

TabularMdp random_mdp(std::size_t n_states, std::size_t n_actions, std::size_t branching, double discount,
                      std::uint64_t seed) {
  if (branching == 0 || branching > n_states) throw std::invalid_argument("random_mdp: invalid branching");
  linalg::Rng rng(seed);
  TabularMdp mdp(n_states, n_actions, discount);
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      std::vector<Outcome> outs;
      double total = 0.0;
      while (outs.size() < branching) {
        const std::size_t next = rng.below(n_states);
        if (std::any_of(outs.begin(), outs.end(), [&](const Outcome& o) { return o.next == next; })) continue;
        const double w = rng.uniform(0.1, 1.0);
        outs.push_back({next, w});
        total += w;
      }
      for (auto& o : outs) o.prob /= total;
      mdp.set_transition(s, a, std::move(outs));
      mdp.set_reward(s, a, rng.uniform(-1.0, 0.0));
    }
  }
  return mdp;
}

}  // namespace rankcollapse::grid
