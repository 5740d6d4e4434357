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
#include <stdexcept>
#include <vector>

#include "rankcollapse/linalg/matrix.hpp"
#include "rankcollapse/linalg/rng.hpp"
#include "rankcollapse/linalg/svd.hpp"

// Kernel-regression model of fitted Q-iteration: each fitting iteration solves
// a kernel-regularized least-squares problem, so Q_{k+1} = A·(R + γ·P·Q_k) with
// the smoothing operator A = G(cI + G)⁻¹.
namespace rankcollapse::kernel {

using linalg::Matrix;
using linalg::SingularSpectrum;
using linalg::Vector;

class InvalidProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct KernelFqiProblem {
  Matrix gram;        // G, symmetric PSD over dataset points
  double reg = 0.0;   // c >= 0
  Matrix transition;  // Pπ, row-stochastic
  Vector reward;      // R
  double discount = 0.9;

  std::size_t size() const { return gram.rows(); }
  // Throws InvalidProblemError describing the first violated invariant.
  void validate() const;
};

Matrix smoothing_operator(const KernelFqiProblem& p);

// S = γ·Pπ·A; drives the unrolled recurrence.
Matrix bootstrap_operator(const KernelFqiProblem& p);

// Q_k after k applications of the recurrence from Q_0 = 0.
Vector iterate_q(const KernelFqiProblem& p, std::size_t k);

// A·M_k·R, the closed form of iterate_q.
Vector unrolled_q(const KernelFqiProblem& p, std::size_t k);

// Exact Q^π solving (I − γPπ)Q = R.
Vector exact_q(const KernelFqiProblem& p);

struct SpectrumTracePoint {
  std::size_t k = 0;
  std::vector<double> sigma;
  std::size_t srank = 0;
};

// Spectrum and srank of M_k = Σ_{i<k} Sⁱ for k = 1..k_max.
std::vector<SpectrumTracePoint> m_spectrum_trace(const Matrix& s, std::size_t k_max, double delta);

struct SrankMonotonicity {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t first_violation_k = 0;  // 0 when none
};

// Counts steps where srank increases. An increase is only a violation when the
// new spectrum's energy at the old rank misses 1 − delta by more than slack.
SrankMonotonicity check_srank_nonincreasing(const std::vector<SpectrumTracePoint>& trace,
                                            double delta, double slack = 1e-10);

// Generators --------------------------------------------------------------

// Q·diag(λ)·Qᵀ with λ in (0, max_eigenvalue), pairwise separated by at least
// 0.4·max_eigenvalue/n.
Matrix random_psd_distinct(std::size_t n, double max_eigenvalue, linalg::Rng& rng);

// D + L·Lᵀ with D positive diagonal and L of the given rank.
Matrix diagonal_plus_low_rank_gram(std::size_t n, std::size_t rank, linalg::Rng& rng);

// Dirichlet-like random row-stochastic matrix.
Matrix random_stochastic(std::size_t n, linalg::Rng& rng);

// Ring chain: state i advances to i+1 (mod n) with a random probability,
// otherwise stays.
Matrix chain_transition(std::size_t n, linalg::Rng& rng);

}  // namespace rankcollapse::kernel
