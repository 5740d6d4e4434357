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

namespace rankcollapse::linalg {

struct QrFactors {
  Matrix q;  // rows × cols, orthonormal columns
  Matrix r;  // cols × cols, upper triangular
};

// Thin Householder QR of a tall (rows >= cols) matrix.
QrFactors householder_qr(const Matrix& a);

// R factor only.
Matrix householder_r(const Matrix& a);

}  // namespace rankcollapse::linalg
