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

#include "rankcollapse/linalg/svd.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rankcollapse/linalg/qr.hpp"

namespace rankcollapse::linalg {

namespace {

std::string convergence_message(int sweeps, double residual) {
  std::ostringstream os;
  os << "one-sided Jacobi SVD did not converge after " << sweeps
     << " sweeps (max normalized off-diagonal " << residual << ")";
  return os.str();
}

// Column-major working storage: column j lives at cols[j * len, (j + 1) * len).
struct Columns {
  std::size_t len = 0;
  std::size_t count = 0;
  std::vector<double> data;

  double* col(std::size_t j) { return data.data() + j * len; }
  const double* col(std::size_t j) const { return data.data() + j * len; }
};

Columns to_columns(const Matrix& a) {
  Columns c{a.rows(), a.cols(), std::vector<double>(a.rows() * a.cols())};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c.data[j * c.len + i] = a(i, j);
  return c;
}

double col_dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void rotate(double* x, double* y, std::size_t n, double c, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

// Orthogonalizes the columns of a in place; accumulates the rotations into v
// when it is non-null.
void jacobi_sweeps(Columns& a, Columns* v) {
  const std::size_t n = a.count;
  const double tol = std::sqrt(static_cast<double>(std::max<std::size_t>(a.len, 1))) * DBL_EPSILON;
  double worst = 0.0;
  for (int sweep = 1; sweep <= kMaxJacobiSweeps; ++sweep) {
    bool rotated = false;
    worst = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double* ai = a.col(i);
        double* aj = a.col(j);
        const double alpha = col_dot(ai, ai, a.len);
        const double beta = col_dot(aj, aj, a.len);
        if (alpha == 0.0 || beta == 0.0) continue;
        const double gamma = col_dot(ai, aj, a.len);
        const double off = std::abs(gamma) / std::sqrt(alpha * beta);
        worst = std::max(worst, off);
        if (off <= tol) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(ai, aj, a.len, c, s);
        if (v != nullptr) rotate(v->col(i), v->col(j), v->len, c, s);
      }
    }
    if (!rotated) return;
  }
  throw SvdConvergenceError(kMaxJacobiSweeps, worst);
}

// Replaces the listed (zero) columns of u with unit vectors orthogonal to
// every other column.
void complete_basis(Matrix& u, const std::vector<std::size_t>& missing) {
  if (missing.empty()) return;
  std::vector<bool> is_missing(u.cols(), false);
  for (std::size_t j : missing) is_missing[j] = true;
  std::size_t candidate = 0;
  for (std::size_t j : missing) {
    for (; candidate < u.rows(); ++candidate) {
      Vector e(u.rows(), 0.0);
      e[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < u.cols(); ++k) {
          if (is_missing[k]) continue;
          double s = 0.0;
          for (std::size_t i = 0; i < u.rows(); ++i) s += u(i, k) * e[i];
          for (std::size_t i = 0; i < u.rows(); ++i) e[i] -= s * u(i, k);
        }
      }
      const double nrm = norm2(e);
      if (nrm > 0.5) {
        for (std::size_t i = 0; i < u.rows(); ++i) u(i, j) = e[i] / nrm;
        is_missing[j] = false;
        ++candidate;
        break;
      }
    }
  }
}

// SVD for rows >= cols.
SingularSpectrum tall_svd(const Matrix& m) {
  const std::size_t n = m.cols();
  Matrix q;
  Columns work;
  if (m.rows() > n) {
    auto qr = householder_qr(m);
    q = std::move(qr.q);
    work = to_columns(qr.r);
  } else {
    work = to_columns(m);
  }
  Columns v = to_columns(Matrix::identity(n));
  jacobi_sweeps(work, &v);

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = std::sqrt(col_dot(work.col(j), work.col(j), work.len));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  SingularSpectrum out;
  out.sigma.resize(n);
  Matrix u_small(work.len, n);
  out.right = Matrix(n, n);
  std::vector<std::size_t> missing;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = norms[j];
    for (std::size_t i = 0; i < n; ++i) out.right(i, k) = v.col(j)[i];
    if (norms[j] == 0.0) {
      missing.push_back(k);
      continue;
    }
    for (std::size_t i = 0; i < work.len; ++i) u_small(i, k) = work.col(j)[i] / norms[j];
  }
  complete_basis(u_small, missing);
  out.left = q.empty() ? std::move(u_small) : q * u_small;
  return out;
}

}  // namespace

SvdConvergenceError::SvdConvergenceError(int sweeps, double residual)
    : std::runtime_error(convergence_message(sweeps, residual)), sweeps_(sweeps), residual_(residual) {}

Matrix SingularSpectrum::reconstruct() const {
  Matrix scaled = left;
  for (std::size_t i = 0; i < scaled.rows(); ++i)
    for (std::size_t k = 0; k < sigma.size(); ++k) scaled(i, k) *= sigma[k];
  return times_transpose(scaled, right);
}

SingularSpectrum svd(const Matrix& m) {
  if (!all_finite(m)) throw std::invalid_argument("svd: matrix has non-finite entries");
  if (m.rows() >= m.cols()) return tall_svd(m);
  SingularSpectrum t = tall_svd(m.transpose());
  std::swap(t.left, t.right);
  return t;
}

std::vector<double> singular_values(const Matrix& m) {
  if (!all_finite(m)) throw std::invalid_argument("singular_values: matrix has non-finite entries");
  const Matrix& tall_in = m.rows() >= m.cols() ? m : m.transpose();
  Columns work = to_columns(tall_in.rows() > tall_in.cols() ? householder_r(tall_in) : tall_in);
  jacobi_sweeps(work, nullptr);
  std::vector<double> sigma(work.count);
  for (std::size_t j = 0; j < work.count; ++j)
    sigma[j] = std::sqrt(col_dot(work.col(j), work.col(j), work.len));
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

std::vector<double> cumulative_energy(std::span<const double> sigma) {
  const double total = std::accumulate(sigma.begin(), sigma.end(), 0.0);
  if (!(total > 0.0)) throw RankUndefinedError("effective rank undefined for an all-zero spectrum");
  std::vector<double> out(sigma.size());
  double running = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    running += sigma[i];
    out[i] = running / total;
  }
  return out;
}

std::size_t srank(std::span<const double> sigma, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("srank: delta must lie in (0, 1)");
  const auto energy = cumulative_energy(sigma);
  for (std::size_t k = 0; k < energy.size(); ++k) {
    if (energy[k] >= 1.0 - delta) return k + 1;
  }
  // Rounding can leave the final fraction a hair under 1 − delta only when
  // delta is tiny; the full spectrum always qualifies.
  return energy.size();
}

std::size_t srank(const SingularSpectrum& spec, double delta) { return srank(spec.sigma, delta); }

double orthonormality_residual(const Matrix& u) {
  return frobenius_norm(transpose_times(u, u) - Matrix::identity(u.cols()));
}

}  // namespace rankcollapse::linalg
