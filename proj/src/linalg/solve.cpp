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

#include "rankcollapse/linalg/solve.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace rankcollapse::linalg {

Matrix solve(const Matrix& a, const Matrix& b) {
  if (!a.is_square()) throw DimensionError("solve: coefficient matrix must be square");
  if (a.rows() != b.rows()) throw DimensionError("solve: right-hand side row count mismatch");
  const std::size_t n = a.rows();
  const std::size_t nrhs = b.cols();
  Matrix lu = a;
  Matrix x = b;
  const double scale = std::max(max_abs(a), 1e-300);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(pivot, k))) pivot = i;
    if (std::abs(lu(pivot, k)) < kPivotTolerance * scale) {
      std::ostringstream os;
      os << "solve: matrix is numerically singular (pivot " << lu(pivot, k) << " at column " << k
         << ")";
      throw SingularMatrixError(os.str());
    }
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(pivot, j));
      for (std::size_t j = 0; j < nrhs; ++j) std::swap(x(k, j), x(pivot, j));
    }
    const double inv = 1.0 / lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) * inv;
      if (f == 0.0) continue;
      lu(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < nrhs; ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t j = 0; j < nrhs; ++j) {
      double s = x(k, j);
      for (std::size_t i = k + 1; i < n; ++i) s -= lu(k, i) * x(i, j);
      x(k, j) = s / lu(k, k);
    }
  }
  return x;
}

Vector solve(const Matrix& a, std::span<const double> b) {
  return solve(a, Matrix::column(b)).col(0);
}

Matrix inverse(const Matrix& a) { return solve(a, Matrix::identity(a.rows())); }

Matrix matrix_power_sum(const Matrix& s, std::size_t k) {
  if (!s.is_square()) throw DimensionError("matrix_power_sum: matrix must be square");
  if (k < 1) throw std::invalid_argument("matrix_power_sum: k must be >= 1");
  const Matrix eye = Matrix::identity(s.rows());
  Matrix m = eye;
  for (std::size_t i = 1; i < k; ++i) m = eye + s * m;
  return m;
}

Matrix matrix_power(const Matrix& s, std::size_t k) {
  if (!s.is_square()) throw DimensionError("matrix_power: matrix must be square");
  Matrix result = Matrix::identity(s.rows());
  Matrix base = s;
  while (k > 0) {
    if (k & 1U) result = result * base;
    k >>= 1U;
    if (k > 0) base = base * base;
  }
  return result;
}

}  // namespace rankcollapse::linalg
