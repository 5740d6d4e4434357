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

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "rankcollapse/linalg/matrix.hpp"

namespace rankcollapse::kernel {

using linalg::Matrix;

// Angle p/q of a full turn. Must satisfy 0 <= p < q and gcd(p, q) = 1.
struct RationalAngle {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double radians() const;
};

// ρ times a rotation: contributes the conjugate eigenvalue pair ρ·e^{±iθ}, or
// the double real eigenvalue ±ρ when θ is 0 or π.
struct RotationBlock {
  double modulus = 0.0;
  RationalAngle angle;
};

struct NormalMatrixSpec {
  std::vector<RotationBlock> blocks;
  // 1x1 real blocks; a negative value has angle 1/2.
  std::vector<double> real_values;
  // Identity conjugator when absent.
  std::optional<std::uint64_t> conjugator_seed;

  std::size_t dimension() const { return 2 * blocks.size() + real_values.size(); }
  // Throws std::invalid_argument on the first violated invariant.
  void validate() const;
};

// One eigen-mode of the constructed matrix: its eigenvalue (upper half-plane
// member for a pair) and the columns of the conjugator spanning it.
struct EigenMode {
  std::complex<double> eigenvalue;
  std::vector<std::size_t> columns;

  double modulus() const { return std::abs(eigenvalue); }
};

struct NormalMatrix {
  Matrix matrix;      // Q·B·Qᵀ
  Matrix conjugator;  // Q
  std::vector<EigenMode> modes;
};

NormalMatrix build_normal_matrix(const NormalMatrixSpec& spec);

// Least common multiple of every block's angle denominator.
// Throws std::overflow_error beyond 2^62.
std::uint64_t angle_period(const NormalMatrixSpec& spec);

// k_l = l·period for l = 1..count.
std::vector<std::uint64_t> psd_subsequence(const NormalMatrixSpec& spec, std::size_t count);

// ‖M_k·q‖ for the first conjugator column of each mode, M_k = Σ_{i<k} Sⁱ.
std::vector<double> mode_gains(const NormalMatrix& normal, const Matrix& m_k);

// Per-mode singular values of M_k from the eigenvalues: |1 − λᵏ|/|1 − λ|.
double mode_gain_closed_form(std::complex<double> eigenvalue, std::uint64_t k);

// f(k) = (1 + |λ_small|ᵏ)/|1 − |λ_large|ᵏ| · |1 − λ_large|/|1 − λ_small|,
// an upper bound on the ratio of M_k singular values for the two modes.
double ratio_upper_bound(std::complex<double> small, std::complex<double> large, std::uint64_t k);

// Random spec with the requested number of rotation blocks, denominators in
// [1, max_den] and moduli in [0.2, 0.95].
NormalMatrixSpec random_normal_spec(std::size_t blocks, std::size_t reals, std::uint64_t max_den,
                                    std::uint64_t seed);

}  // namespace rankcollapse::kernel
