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

#include <stdexcept>
#include <string>
#include <vector>

#include "rankcollapse/linalg/matrix.hpp"

namespace rankcollapse::linalg {

// Thin SVD m = U·diag(sigma)·Vᵀ with d = min(rows, cols) components.
struct SingularSpectrum {
  std::vector<double> sigma;  // non-increasing, >= 0
  Matrix left;                // rows × d, orthonormal columns
  Matrix right;               // cols × d, orthonormal columns

  std::size_t size() const { return sigma.size(); }
  Matrix reconstruct() const;
};

class SvdConvergenceError : public std::runtime_error {
 public:
  SvdConvergenceError(int sweeps, double residual);
  int sweeps() const { return sweeps_; }
  // Largest normalized off-diagonal Gram entry when the sweep cap was hit.
  double residual() const { return residual_; }

 private:
  int sweeps_;
  double residual_;
};

class RankUndefinedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr int kMaxJacobiSweeps = 60;

// One-sided (Hestenes) Jacobi SVD. Tall inputs are first reduced by a
// Householder QR so the rotations act on a square triangular factor.
SingularSpectrum svd(const Matrix& m);

// Singular values only; skips accumulating singular vectors.
std::vector<double> singular_values(const Matrix& m);

// Effective rank: min{k : Σ_{i<=k} σ_i / Σ σ_i >= 1 − delta}.
std::size_t srank(std::span<const double> sigma, double delta);
std::size_t srank(const SingularSpectrum& spec, double delta);

// Σ_{i<=k} σ_i / Σ σ_i for k = 1..d.
std::vector<double> cumulative_energy(std::span<const double> sigma);

// ‖UᵀU − I‖_F
double orthonormality_residual(const Matrix& u);

}  // namespace rankcollapse::linalg
