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
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankcollapse::linalg {

using Vector = std::vector<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(std::span<const double> values);
  static Matrix row_vector(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {entries_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {entries_.data() + i * cols_, cols_}; }
  Vector col(std::size_t j) const;

  double* data() { return entries_.data(); }
  const double* data() const { return entries_.data(); }
  const std::vector<double>& entries() const { return entries_; }

  Matrix transpose() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

// aᵀ·b without materializing the transpose.
Matrix transpose_times(const Matrix& a, const Matrix& b);
// a·bᵀ without materializing the transpose.
Matrix times_transpose(const Matrix& a, const Matrix& b);

Vector operator*(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
// Induced infinity norm: largest absolute row sum.
double infinity_norm(const Matrix& m);
double trace(const Matrix& m);
// Frobenius inner product Σ a_ij b_ij.
double inner(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& m);
bool all_finite(std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

// ‖m − mᵀ‖_F
double symmetry_residual(const Matrix& m);
// ‖m·mᵀ − mᵀ·m‖_F
double normality_residual(const Matrix& m);

// Symmetric check within tol plus a Cholesky attempt on m + tol·I.
bool is_positive_semidefinite(const Matrix& m, double tol);

std::string to_string(const Matrix& m);

}  // namespace rankcollapse::linalg
