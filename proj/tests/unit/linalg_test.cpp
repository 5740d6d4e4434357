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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "rankcollapse/linalg/matrix.hpp"
#include "rankcollapse/linalg/qr.hpp"
#include "rankcollapse/linalg/rng.hpp"
#include "rankcollapse/linalg/solve.hpp"
#include "rankcollapse/linalg/svd.hpp"

using namespace rankcollapse::linalg;

namespace {

double reconstruction_residual(const Matrix& m, const SingularSpectrum& s) {
  return frobenius_norm(m - s.reconstruct());
}

void expect_valid_spectrum(const Matrix& m, const SingularSpectrum& s) {
  const double tol = 1e-10 * std::max(1.0, frobenius_norm(m));
  EXPECT_LE(reconstruction_residual(m, s), tol);
  EXPECT_LE(orthonormality_residual(s.left), 1e-10);
  EXPECT_LE(orthonormality_residual(s.right), 1e-10);
  for (std::size_t i = 0; i < s.sigma.size(); ++i) {
    EXPECT_GE(s.sigma[i], 0.0);
    if (i > 0) {
      EXPECT_LE(s.sigma[i], s.sigma[i - 1]);
    }
  }
}

// Cumulative-sum search written independently of the library routine.
std::size_t srank_oracle(std::vector<double> sigma, double delta) {
  double total = 0.0;
  for (double s : sigma) total += s;
  double acc = 0.0;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    acc += sigma[k];
    if (acc / total >= 1.0 - delta) return k + 1;
  }
  return sigma.size();
}

}  // namespace

TEST(Svd, DiagonalMatrix) {
  const Matrix m = Matrix::from_rows({{3, 0}, {0, 2}});
  const auto s = svd(m);
  ASSERT_EQ(s.sigma.size(), 2u);
  EXPECT_DOUBLE_EQ(s.sigma[0], 3.0);
  EXPECT_DOUBLE_EQ(s.sigma[1], 2.0);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(std::abs(s.left(i, i)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(s.right(i, i)), 1.0, 1e-15);
  }
  expect_valid_spectrum(m, s);
}

TEST(Svd, Permutation) {
  const Matrix m = Matrix::from_rows({{0, 1}, {1, 0}});
  const auto s = svd(m);
  EXPECT_NEAR(s.sigma[0], 1.0, 1e-15);
  EXPECT_NEAR(s.sigma[1], 1.0, 1e-15);
  expect_valid_spectrum(m, s);
}

TEST(Svd, SeededRandom50x20) {
  Rng rng(20240601);
  const Matrix m = gaussian_matrix(50, 20, rng);
  const auto s = svd(m);
  EXPECT_LE(reconstruction_residual(m, s), 1e-10);
  expect_valid_spectrum(m, s);
}

TEST(Svd, WideAndRankDeficient) {
  Rng rng(7);
  const Matrix a = gaussian_matrix(6, 2, rng);
  const Matrix b = gaussian_matrix(2, 9, rng);
  const Matrix m = a * b;  // 6x9, rank 2
  const auto s = svd(m);
  ASSERT_EQ(s.sigma.size(), 6u);
  EXPECT_EQ(s.left.rows(), 6u);
  EXPECT_EQ(s.right.rows(), 9u);
  EXPECT_LT(s.sigma[2], 1e-12 * s.sigma[0]);
  expect_valid_spectrum(m, s);

  const auto zero = svd(Matrix(4, 3));
  expect_valid_spectrum(Matrix(4, 3), zero);
  EXPECT_EQ(zero.sigma, std::vector<double>(3, 0.0));
}

TEST(Svd, ValuesOnlyAgreesWithFull) {
  Rng rng(11);
  const Matrix m = gaussian_matrix(40, 13, rng);
  const auto full = svd(m);
  const auto values = singular_values(m);
  ASSERT_EQ(values.size(), full.sigma.size());
  for (std::size_t i = 0; i < values.size(); ++i) EXPECT_NEAR(values[i], full.sigma[i], 1e-12);
}

TEST(Svd, RejectsNonFinite) {
  Matrix m(2, 2);
  m(0, 1) = std::nan("");
  EXPECT_THROW(svd(m), std::invalid_argument);
}

TEST(Svd, ConvergenceErrorCarriesResidual) {
  const SvdConvergenceError e(60, 3.5e-9);
  EXPECT_EQ(e.sweeps(), 60);
  EXPECT_DOUBLE_EQ(e.residual(), 3.5e-9);
  EXPECT_NE(std::string(e.what()).find("60 sweeps"), std::string::npos);
}

TEST(Svd, SmallSingularValuesKeepRelativeAccuracy) {
  // Graded diagonal conjugated by orthogonal factors; one-sided Jacobi recovers
  // tiny singular values to high relative accuracy.
  Rng rng(3);
  const std::vector<double> d = {1.0, 1e-3, 1e-6, 1e-9};
  const Matrix m = random_orthogonal(4, rng) * Matrix::diagonal(d) * random_orthogonal(4, rng);
  const auto s = singular_values(m);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(s[i] / d[i], 1.0, 1e-6);
}

TEST(SvdProperty, ReconstructionOverThousandSeededMatrices) {
  Rng rng(123456789);
  for (int trial = 0; trial < 1000; ++trial) {
    // Mostly small shapes with a tail out to 256 x 256.
    const bool large = trial % 50 == 0;
    const std::size_t hi = large ? 256 : 48;
    const std::size_t rows = 1 + rng.below(hi);
    const std::size_t cols = 1 + rng.below(hi);
    const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const Matrix m = gaussian_matrix(rows, cols, rng, scale);
    const auto s = svd(m);
    const double tol = 1e-10 * std::max(1.0, frobenius_norm(m));
    ASSERT_LE(reconstruction_residual(m, s), tol) << rows << "x" << cols;
    ASSERT_LE(orthonormality_residual(s.left), 1e-10);
    ASSERT_LE(orthonormality_residual(s.right), 1e-10);
  }
}

TEST(Srank, TaggedExamples) {
  EXPECT_EQ(srank(std::vector<double>(100, 1.0), 0.01), 99u);
  EXPECT_EQ(srank(std::vector<double>{5, 0, 0}, 0.01), 1u);
  EXPECT_EQ(srank(std::vector<double>{10, 1, 0.1}, 0.01), 2u);
}

TEST(Srank, ZeroSpectrumIsAnError) {
  EXPECT_THROW(srank(std::vector<double>{0, 0}, 0.01), RankUndefinedError);
  EXPECT_THROW(srank(std::vector<double>{1, 0}, 0.0), std::invalid_argument);
}

TEST(SrankProperty, MatchesOracleScaleInvariantAndMonotoneInDelta) {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + rng.below(80);
    std::vector<double> sigma(d);
    // Log-uniform magnitudes exercise spectra spanning many decades.
    for (double& s : sigma) s = std::pow(10.0, rng.uniform(-6.0, 2.0));
    std::sort(sigma.begin(), sigma.end(), std::greater<>());
    const double delta = rng.uniform(0.001, 0.5);
    const std::size_t r = srank(sigma, delta);
    ASSERT_EQ(r, srank_oracle(sigma, delta));
    ASSERT_GE(r, 1u);
    ASSERT_LE(r, d);

    // Power-of-two scale factors are exact, so the fractions are unchanged bit for bit.
    std::vector<double> scaled = sigma;
    const double c = std::ldexp(1.0, static_cast<int>(rng.below(40)) - 20);
    for (double& s : scaled) s *= c;
    ASSERT_EQ(srank(scaled, delta), r);

    const double delta2 = rng.uniform(delta, 0.9);
    ASSERT_GE(r, srank(sigma, delta2));
  }
}

TEST(Solve, Examples) {
  Rng rng(5);
  const Matrix b = gaussian_matrix(3, 2, rng);
  EXPECT_EQ(solve(Matrix::identity(3), b), b);

  const Vector x = solve(Matrix::from_rows({{2, 0}, {0, 4}}), Vector{2, 4});
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 1.0);

  const Matrix g = gaussian_matrix(30, 30, rng);
  const Matrix spd = transpose_times(g, g) + Matrix::identity(30);
  const Matrix rhs = gaussian_matrix(30, 1, rng);
  const Matrix sol = solve(spd, rhs);
  EXPECT_LE(frobenius_norm(spd * sol - rhs), 1e-9 * frobenius_norm(rhs));
}

TEST(Solve, SingularMatrix) {
  EXPECT_THROW(solve(Matrix::from_rows({{1, 2}, {2, 4}}), Vector{1, 1}), SingularMatrixError);
  EXPECT_THROW(solve(Matrix(2, 3), Matrix(2, 1)), DimensionError);
}

TEST(MatrixPowerSum, Examples) {
  EXPECT_EQ(matrix_power_sum(Matrix(3, 3), 5), Matrix::identity(3));
  const Matrix m = matrix_power_sum(Matrix::from_rows({{0.5}}), 3);
  EXPECT_DOUBLE_EQ(m(0, 0), 1.75);
  EXPECT_THROW(matrix_power_sum(Matrix::identity(2), 0), std::invalid_argument);
}

TEST(MatrixPowerSum, MatchesExplicitPowers) {
  Rng rng(17);
  Matrix s = gaussian_matrix(12, 12, rng);
  const double radius = singular_values(s)[0];  // spectral norm bounds the spectral radius
  s *= 0.9 / radius;
  Matrix oracle(12, 12);
  Matrix power = Matrix::identity(12);
  for (int i = 0; i < 40; ++i) {
    oracle += power;
    power = power * s;
  }
  EXPECT_LE(max_abs(matrix_power_sum(s, 40) - oracle), 1e-12);
  // Two-term recurrence holds exactly as stated.
  for (std::size_t k = 1; k < 6; ++k) {
    const Matrix lhs = matrix_power_sum(s, k + 1);
    const Matrix rhs = Matrix::identity(12) + s * matrix_power_sum(s, k);
    EXPECT_EQ(lhs, rhs);
  }
}

TEST(MatrixPower, AgreesWithRepeatedProduct) {
  Rng rng(2);
  const Matrix s = gaussian_matrix(5, 5, rng, 0.3);
  Matrix p = Matrix::identity(5);
  for (int i = 0; i < 7; ++i) p = p * s;
  EXPECT_LE(max_abs(matrix_power(s, 7) - p), 1e-14);
}

TEST(Qr, ReconstructsAndIsOrthonormal) {
  Rng rng(8);
  const Matrix a = gaussian_matrix(9, 4, rng);
  const auto [q, r] = householder_qr(a);
  EXPECT_LE(frobenius_norm(q * r - a), 1e-13);
  EXPECT_LE(orthonormality_residual(q), 1e-13);
  for (std::size_t i = 1; i < 4; ++i)
    for (std::size_t j = 0; j < i; ++j) EXPECT_EQ(r(i, j), 0.0);
}

TEST(Rng, DeterministicAndInRange) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    EXPECT_LT(a.below(7), 7u);
    b.below(7);
  }
  Rng c(1);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double z = c.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.05);
  EXPECT_NEAR(sq / 20000, 1.0, 0.05);
}

TEST(Matrix, PsdCheck) {
  EXPECT_TRUE(is_positive_semidefinite(Matrix::diagonal(std::vector<double>{1, 0}), 1e-9));
  EXPECT_FALSE(is_positive_semidefinite(Matrix::diagonal(std::vector<double>{1, -1e-3}), 1e-9));
  EXPECT_FALSE(is_positive_semidefinite(Matrix::from_rows({{1, 1}, {0, 1}}), 1e-9));
}
