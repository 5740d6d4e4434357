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

#include "rankcollapse/nfqi/penalty.hpp"

#include "rankcollapse/linalg/svd.hpp"

namespace rankcollapse::nfqi {

PenaltyValue lp_penalty(const Matrix& features) {
  if (features.empty()) throw linalg::DimensionError("lp_penalty: empty feature batch");
  const linalg::SingularSpectrum spec = linalg::svd(features);
  const std::size_t last = spec.size() - 1;
  PenaltyValue out;
  out.sigma_max = spec.sigma.front();
  out.sigma_min = spec.sigma[last];
  out.value = out.sigma_max * out.sigma_max - out.sigma_min * out.sigma_min;
  out.gradient = Matrix(features.rows(), features.cols());
  if (out.sigma_max - out.sigma_min <= kIsotropicGap) return out;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto row = out.gradient.row(i);
    const double top = 2.0 * out.sigma_max * spec.left(i, 0);
    const double bottom = 2.0 * out.sigma_min * spec.left(i, last);
    for (std::size_t j = 0; j < features.cols(); ++j) row[j] = top * spec.right(j, 0) - bottom * spec.right(j, last);
  }
  return out;
}

double lp_penalty_value(const Matrix& features) {
  if (features.empty()) throw linalg::DimensionError("lp_penalty_value: empty feature batch");
  const auto sigma = linalg::singular_values(features);
  return sigma.front() * sigma.front() - sigma.back() * sigma.back();
}

}  // namespace rankcollapse::nfqi
