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

#include "rankcollapse/kernel/kernel_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rankcollapse/linalg/solve.hpp"

namespace rankcollapse::kernel {

using linalg::Rng;

void KernelFqiProblem::validate() const {
  const std::size_t n = gram.rows();
  auto fail = [](const std::string& msg) { throw InvalidProblemError("KernelFqiProblem: " + msg); };
  if (!gram.is_square()) fail("gram must be square");
  if (transition.rows() != n || transition.cols() != n) fail("transition must be n x n");
  if (reward.size() != n) fail("reward length must equal n");
  if (!(reg >= 0.0)) fail("regularization must be nonnegative");
  if (!(discount >= 0.0 && discount < 1.0)) fail("discount must lie in [0, 1)");
  if (!linalg::all_finite(gram) || !linalg::all_finite(transition) || !linalg::all_finite(reward))
    fail("non-finite entries");
  if (linalg::symmetry_residual(gram) > 1e-10) fail("gram is not symmetric");
  // PSD within 1e-10 on the eigenvalues.
  if (!linalg::is_positive_semidefinite(gram, 1e-10)) fail("gram is not positive semidefinite");
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (double x : transition.row(i)) {
      if (x < 0.0) fail("transition has a negative entry");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-10) {
      std::ostringstream os;
      os << "transition row " << i << " sums to " << sum;
      fail(os.str());
    }
  }
}

Matrix smoothing_operator(const KernelFqiProblem& p) {
  p.validate();
  Matrix shifted = p.gram;
  for (std::size_t i = 0; i < shifted.rows(); ++i) shifted(i, i) += p.reg;
  // (cI + G) and G are symmetric, so A = G(cI+G)⁻¹ = ((cI+G)⁻¹G)ᵀ.
  return linalg::solve(shifted, p.gram).transpose();
}

Matrix bootstrap_operator(const KernelFqiProblem& p) {
  return p.discount * (p.transition * smoothing_operator(p));
}

Vector iterate_q(const KernelFqiProblem& p, std::size_t k) {
  const Matrix a = smoothing_operator(p);
  Vector q(p.size(), 0.0);
  for (std::size_t it = 0; it < k; ++it) {
    Vector target = p.transition * q;
    for (std::size_t i = 0; i < target.size(); ++i) target[i] = p.reward[i] + p.discount * target[i];
    q = a * target;
  }
  return q;
}

Vector unrolled_q(const KernelFqiProblem& p, std::size_t k) {
  if (k == 0) return Vector(p.size(), 0.0);
  const Matrix a = smoothing_operator(p);
  const Matrix s = p.discount * (p.transition * a);
  return a * (linalg::matrix_power_sum(s, k) * p.reward);
}

Vector exact_q(const KernelFqiProblem& p) {
  p.validate();
  Matrix lhs = Matrix::identity(p.size()) - p.discount * p.transition;
  return linalg::solve(lhs, p.reward);
}

std::vector<SpectrumTracePoint> m_spectrum_trace(const Matrix& s, std::size_t k_max, double delta) {
  if (!s.is_square()) throw linalg::DimensionError("m_spectrum_trace: S must be square");
  std::vector<SpectrumTracePoint> out;
  out.reserve(k_max);
  const Matrix eye = Matrix::identity(s.rows());
  Matrix m = eye;
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (k > 1) m = eye + s * m;
    SpectrumTracePoint point;
    point.k = k;
    point.sigma = linalg::singular_values(m);
    point.srank = linalg::srank(point.sigma, delta);
    out.push_back(std::move(point));
  }
  return out;
}

SrankMonotonicity check_srank_nonincreasing(const std::vector<SpectrumTracePoint>& trace,
                                            double delta, double slack) {
  SrankMonotonicity result;
  for (std::size_t t = 1; t < trace.size(); ++t) {
    ++result.checked;
    const auto& prev = trace[t - 1];
    const auto& next = trace[t];
    if (next.srank <= prev.srank) continue;
    const auto energy = linalg::cumulative_energy(next.sigma);
    if (energy[prev.srank - 1] < 1.0 - delta - slack) {
      ++result.violations;
      if (result.first_violation_k == 0) result.first_violation_k = next.k;
    }
  }
  return result;
}

Matrix random_psd_distinct(std::size_t n, double max_eigenvalue, Rng& rng) {
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Slot i of n, jittered inside the middle 60% of the slot.
    eig[i] = max_eigenvalue * (static_cast<double>(i) + 0.2 + 0.6 * rng.uniform()) /
             static_cast<double>(n);
  }
  const Matrix q = linalg::random_orthogonal(n, rng);
  Matrix scaled = q;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scaled(i, j) *= eig[j];
  Matrix s = linalg::times_transpose(scaled, q);
  // Symmetrize away rounding so downstream symmetric checks are exact.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s(i, j) = s(j, i) = 0.5 * (s(i, j) + s(j, i));
  return s;
}

Matrix diagonal_plus_low_rank_gram(std::size_t n, std::size_t rank, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(rank, 1)));
  const Matrix l = linalg::gaussian_matrix(n, rank, rng, scale);
  Matrix g = linalg::times_transpose(l, l);
  for (std::size_t i = 0; i < n; ++i) g(i, i) += 0.1 + rng.uniform();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g(i, j) = g(j, i) = 0.5 * (g(i, j) + g(j, i));
  return g;
}

Matrix random_stochastic(std::size_t n, Rng& rng) {
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double u;
      do {
        u = rng.uniform();
      } while (u <= 0.0);
      p(i, j) = -std::log(u);
      sum += p(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) p(i, j) /= sum;
  }
  return p;
}

Matrix chain_transition(std::size_t n, Rng& rng) {
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double advance = rng.uniform(0.2, 0.9);
    p(i, (i + 1) % n) += advance;
    p(i, i) += 1.0 - advance;
  }
  return p;
}

}  // namespace rankcollapse::kernel
