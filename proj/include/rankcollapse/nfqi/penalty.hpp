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

#include "rankcollapse/linalg/matrix.hpp"

namespace rankcollapse::nfqi {

using linalg::Matrix;

struct PenaltyValue {
  double value = 0.0;
  Matrix gradient;  // same shape as the feature batch
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

// Extreme singular values closer than this are treated as isotropic and
// get a zero gradient.
inline constexpr double kIsotropicGap = 1e-10;

// σ²_max − σ²_min of a batch feature matrix, with d = min(rows, cols). The
// gradient 2σ_max·u₁v₁ᵀ − 2σ_min·u_d·v_dᵀ holds the singular vectors fixed;
// ties on an extreme value pick the first index of the sorted spectrum.
PenaltyValue lp_penalty(const Matrix& features);

// Value only; skips the singular vectors.
double lp_penalty_value(const Matrix& features);

}  // namespace rankcollapse::nfqi
