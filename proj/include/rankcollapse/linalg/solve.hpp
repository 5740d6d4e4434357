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

#include "rankcollapse/linalg/matrix.hpp"

namespace rankcollapse::linalg {

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPivotTolerance = 1e-12;

// Solves a·x = b with partially pivoted LU. Throws SingularMatrixError when a
// pivot falls below kPivotTolerance relative to the largest entry of a.
Matrix solve(const Matrix& a, const Matrix& b);
Vector solve(const Matrix& a, std::span<const double> b);

Matrix inverse(const Matrix& a);

// M_k = Σ_{i=0}^{k-1} Sⁱ accumulated as M_1 = I, M_{k+1} = I + S·M_k.
Matrix matrix_power_sum(const Matrix& s, std::size_t k);

Matrix matrix_power(const Matrix& s, std::size_t k);

}  // namespace rankcollapse::linalg
