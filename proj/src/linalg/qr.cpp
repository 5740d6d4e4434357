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

#include "rankcollapse/linalg/qr.hpp"

#include <cmath>
#include <vector>

namespace rankcollapse::linalg {

namespace {

// Reduces work (a copy of the input) in place to R in its upper triangle and
// returns the Householder vectors, one per column.
std::vector<Vector> reduce(Matrix& work) {
  const std::size_t m = work.rows();
  const std::size_t n = work.cols();
  if (m < n) throw DimensionError("householder_qr: expects rows >= cols");
  std::vector<Vector> reflectors;
  reflectors.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector v(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = work(i, k);
    const double alpha = norm2(v);
    if (alpha == 0.0) {
      reflectors.emplace_back();
      continue;
    }
    v[0] += v[0] >= 0.0 ? alpha : -alpha;
    const double vnorm = norm2(v);
    for (double& x : v) x /= vnorm;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i - k] * work(i, j);
      s *= 2.0;
      for (std::size_t i = k; i < m; ++i) work(i, j) -= s * v[i - k];
    }
    reflectors.push_back(std::move(v));
  }
  return reflectors;
}

Matrix upper_triangle(const Matrix& work) {
  const std::size_t n = work.cols();
  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) r(i, j) = work(i, j);
  return r;
}

}  // namespace

QrFactors householder_qr(const Matrix& a) {
  Matrix work = a;
  const auto reflectors = reduce(work);
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();

  Matrix q(m, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    const Vector& v = reflectors[kk];
    if (v.empty()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = kk; i < m; ++i) s += v[i - kk] * q(i, j);
      s *= 2.0;
      for (std::size_t i = kk; i < m; ++i) q(i, j) -= s * v[i - kk];
    }
  }
  return {std::move(q), upper_triangle(work)};
}

Matrix householder_r(const Matrix& a) {
  Matrix work = a;
  reduce(work);
  return upper_triangle(work);
}

}  // namespace rankcollapse::linalg
