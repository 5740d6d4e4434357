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

#include "rankcollapse/linalg/rng.hpp"

#include <cmath>
#include <numbers>

#include "rankcollapse/linalg/qr.hpp"

namespace rankcollapse::linalg {

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Rng Rng::split() { return Rng(next_u64() ^ 0x5851f42d4c957f2dULL); }

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

Matrix random_column_orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
  if (cols > rows) throw DimensionError("random_column_orthonormal: cols > rows");
  if (cols == 0) return Matrix(rows, 0);
  auto [q, r] = householder_qr(gaussian_matrix(rows, cols, rng));
  // Fix column signs so the distribution is Haar rather than QR-convention biased.
  for (std::size_t j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0)
      for (std::size_t i = 0; i < rows; ++i) q(i, j) = -q(i, j);
  }
  return q;
}

Matrix random_orthogonal(std::size_t n, Rng& rng) { return random_column_orthonormal(n, n, rng); }

}  // namespace rankcollapse::linalg
