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
#include <span>
#include <stdexcept>
#include <vector>

#include "rankcollapse/linalg/matrix.hpp"
#include "rankcollapse/linalg/rng.hpp"
#include "rankcollapse/linalg/svd.hpp"

// Deep linear Q-networks Q = W_N·W_φ·x trained by explicit-Euler gradient
// flow, with W_φ = W_{N-1}⋯W_1 as the feature map.
namespace rankcollapse::deeplinear {

using linalg::Matrix;
using linalg::SingularSpectrum;
using linalg::Vector;

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, const std::string& what);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class DegenerateSpectrumError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DeepLinearNet {
 public:
  // layers[j] maps dimension d_j to d_{j+1}; the last layer has one row.
  explicit DeepLinearNet(std::vector<Matrix> layers);

  std::size_t depth() const { return layers_.size(); }
  std::vector<std::size_t> dims() const;
  const std::vector<Matrix>& layers() const { return layers_; }
  std::vector<Matrix>& layers() { return layers_; }
  const Matrix& last_layer() const { return layers_.back(); }

  // Product of layers [first, last) applied right to left, i.e.
  // layers[last-1]⋯layers[first]; identity of size d_first when empty.
  Matrix product(std::size_t first, std::size_t last) const;
  Matrix feature_map() const { return product(0, depth() - 1); }
  Matrix end_to_end() const { return product(0, depth()); }

 private:
  std::vector<Matrix> layers_;
};

// W_j = O_j·diag(σ)·O_{j-1}ᵀ for the feature layers, with O_j drawn as random
// column-orthonormal d_j×|σ| factors. The last layer is Gaussian with scale
// 0.1/√d_{N-1}.
DeepLinearNet balanced_init(std::span<const std::size_t> dims, std::span<const double> sigma,
                            linalg::Rng& rng);

// Same construction with caller-supplied factors O_0..O_{N-1}.
DeepLinearNet balanced_from_factors(std::span<const Matrix> factors, std::span<const double> sigma,
                                    Matrix last_layer);

// max_j ‖W_{j+1}ᵀW_{j+1} − W_jW_jᵀ‖_F over the feature layers.
double balancedness_residual(const DeepLinearNet& net);

// ∂L/∂W_j = (W_N⋯W_{j+1})ᵀ · grad · (W_{j-1}⋯W_1)ᵀ where grad = ∂L/∂W_{N:1}.
std::vector<Matrix> layer_gradients(const DeepLinearNet& net, const Matrix& end_to_end_grad);

// One Euler step of size `step`. Throws DivergenceError tagged with
// step_index when any updated weight is non-finite.
DeepLinearNet flow_step(const DeepLinearNet& net, const Matrix& end_to_end_grad, double step,
                        std::size_t step_index = 0);

// Squared loss L = (1/2m)·Σ_i (Q(x_i) − y_i)² over the m input columns.
double squared_loss(const DeepLinearNet& net, const Matrix& inputs, std::span<const double> targets);
Matrix squared_loss_gradient(const DeepLinearNet& net, const Matrix& inputs,
                             std::span<const double> targets);

// Rate of change of σ_r(W_φ) under the flow for a balanced net:
// −(N−1)·(σ_r²)^{1−1/(N−1)}·⟨W_Nᵀ·grad, u_r·v_rᵀ⟩. r is zero-based.
double sigma_dot_predicted(const DeepLinearNet& net, const Matrix& end_to_end_grad, std::size_t r);

inline constexpr double kBalancednessGuard = 1e-6;
inline constexpr double kSimpleGapGuard = 1e-8;

// Largest perturbation of every singular value of W_φ that keeps its srank
// from rising: (Σ_{j≤r}σ_j − (1−δ)Σ_jσ_j)/(r + d) with r = srank, d = |σ|.
// Throws DegenerateSpectrumError when r = 1.
double zeta_threshold(std::span<const double> sigma, double delta);

// ‖W_N‖_∞ (max absolute row sum) times zeta_threshold.
double epsilon_zero_bound(const Matrix& w_last, std::span<const double> sigma, double delta);

}  // namespace rankcollapse::deeplinear
