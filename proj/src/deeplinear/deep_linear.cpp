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

#include "rankcollapse/deeplinear/deep_linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rankcollapse::deeplinear {

namespace {

std::string divergence_message(std::size_t step, const std::string& what) {
  std::ostringstream os;
  os << "deep linear flow diverged at step " << step << ": " << what;
  return os.str();
}

}  // namespace

DivergenceError::DivergenceError(std::size_t step, const std::string& what)
    : std::runtime_error(divergence_message(step, what)), step_(step) {}

DeepLinearNet::DeepLinearNet(std::vector<Matrix> layers) : layers_(std::move(layers)) {
  if (layers_.size() < 3) throw std::invalid_argument("DeepLinearNet: depth must be >= 3");
  for (std::size_t j = 0; j + 1 < layers_.size(); ++j) {
    if (layers_[j + 1].cols() != layers_[j].rows()) {
      std::ostringstream os;
      os << "DeepLinearNet: layer " << j + 2 << " has " << layers_[j + 1].cols()
         << " columns but layer " << j + 1 << " has " << layers_[j].rows() << " rows";
      throw linalg::DimensionError(os.str());
    }
  }
  if (layers_.back().rows() != 1) throw linalg::DimensionError("DeepLinearNet: last layer must have one row");
}

std::vector<std::size_t> DeepLinearNet::dims() const {
  std::vector<std::size_t> d{layers_.front().cols()};
  for (const auto& w : layers_) d.push_back(w.rows());
  return d;
}

Matrix DeepLinearNet::product(std::size_t first, std::size_t last) const {
  if (first > last || last > layers_.size()) throw std::out_of_range("DeepLinearNet::product");
  if (first == last) {
    const std::size_t n = first < layers_.size() ? layers_[first].cols() : layers_.back().rows();
    return Matrix::identity(n);
  }
  Matrix out = layers_[first];
  for (std::size_t j = first + 1; j < last; ++j) out = layers_[j] * out;
  return out;
}

DeepLinearNet balanced_from_factors(std::span<const Matrix> factors, std::span<const double> sigma,
                                    Matrix last_layer) {
  if (factors.size() < 3) throw std::invalid_argument("balanced_from_factors: need >= 3 factors");
  for (const auto& o : factors) {
    if (o.cols() != sigma.size())
      throw linalg::DimensionError("balanced_from_factors: factor width must equal |sigma|");
  }
  for (double s : sigma)
    if (!(s > 0.0)) throw std::invalid_argument("balanced_from_factors: sigma must be positive");
  const Matrix core = Matrix::diagonal(sigma);
  std::vector<Matrix> layers;
  for (std::size_t j = 1; j < factors.size(); ++j)
    layers.push_back(linalg::times_transpose(factors[j] * core, factors[j - 1]));
  layers.push_back(std::move(last_layer));
  return DeepLinearNet(std::move(layers));
}

DeepLinearNet balanced_init(std::span<const std::size_t> dims, std::span<const double> sigma,
                            linalg::Rng& rng) {
  if (dims.size() < 4) throw std::invalid_argument("balanced_init: need N >= 3 (at least 4 dims)");
  if (dims.back() != 1) throw linalg::DimensionError("balanced_init: output dimension must be 1");
  const std::size_t feature_dim = dims[dims.size() - 2];
  for (std::size_t j = 0; j + 1 < dims.size(); ++j) {
    if (sigma.size() > dims[j]) {
      std::ostringstream os;
      os << "balanced_init: " << sigma.size() << " singular values exceed dimension d_" << j
         << " = " << dims[j];
      throw linalg::DimensionError(os.str());
    }
  }
  std::vector<Matrix> factors;
  for (std::size_t j = 0; j + 1 < dims.size(); ++j)
    factors.push_back(linalg::random_column_orthonormal(dims[j], sigma.size(), rng));
  Matrix last = linalg::gaussian_matrix(1, feature_dim, rng, 0.1 / std::sqrt(static_cast<double>(feature_dim)));
  return balanced_from_factors(factors, sigma, std::move(last));
}

double balancedness_residual(const DeepLinearNet& net) {
  double worst = 0.0;
  const auto& w = net.layers();
  for (std::size_t j = 0; j + 2 < w.size(); ++j) {
    const Matrix diff = linalg::transpose_times(w[j + 1], w[j + 1]) - linalg::times_transpose(w[j], w[j]);
    worst = std::max(worst, linalg::frobenius_norm(diff));
  }
  return worst;
}

std::vector<Matrix> layer_gradients(const DeepLinearNet& net, const Matrix& end_to_end_grad) {
  const std::size_t n = net.depth();
  if (end_to_end_grad.rows() != 1 || end_to_end_grad.cols() != net.layers().front().cols())
    throw linalg::DimensionError("layer_gradients: gradient must be 1 x d_0");
  // prefix[j] = W_j⋯W_1 (zero-based: layers[j-1]⋯layers[0]).
  std::vector<Matrix> prefix(n);
  prefix[0] = Matrix::identity(net.layers().front().cols());
  for (std::size_t j = 1; j < n; ++j) prefix[j] = net.layers()[j - 1] * prefix[j - 1];
  std::vector<Matrix> grads(n);
  Matrix suffix = Matrix::identity(1);  // W_N⋯W_{j+1}
  for (std::size_t j = n; j-- > 0;) {
    grads[j] = linalg::times_transpose(linalg::transpose_times(suffix, end_to_end_grad), prefix[j]);
    suffix = suffix * net.layers()[j];
  }
  return grads;
}

DeepLinearNet flow_step(const DeepLinearNet& net, const Matrix& end_to_end_grad, double step,
                        std::size_t step_index) {
  if (!(step > 0.0)) throw std::invalid_argument("flow_step: step must be positive");
  const auto grads = layer_gradients(net, end_to_end_grad);
  DeepLinearNet next = net;
  for (std::size_t j = 0; j < grads.size(); ++j) {
    next.layers()[j] -= step * grads[j];
    if (!linalg::all_finite(next.layers()[j])) {
      std::ostringstream os;
      os << "layer " << j + 1 << " became non-finite";
      throw DivergenceError(step_index, os.str());
    }
  }
  return next;
}

double squared_loss(const DeepLinearNet& net, const Matrix& inputs, std::span<const double> targets) {
  const Matrix q = net.end_to_end() * inputs;
  if (targets.size() != q.cols()) throw linalg::DimensionError("squared_loss: target count mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = q(0, i) - targets[i];
    sum += r * r;
  }
  return 0.5 * sum / static_cast<double>(targets.size());
}

Matrix squared_loss_gradient(const DeepLinearNet& net, const Matrix& inputs,
                             std::span<const double> targets) {
  Matrix residual = net.end_to_end() * inputs;
  if (targets.size() != residual.cols())
    throw linalg::DimensionError("squared_loss_gradient: target count mismatch");
  const double scale = 1.0 / static_cast<double>(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) residual(0, i) = (residual(0, i) - targets[i]) * scale;
  return linalg::times_transpose(residual, inputs);
}

double sigma_dot_predicted(const DeepLinearNet& net, const Matrix& end_to_end_grad, std::size_t r) {
  const double imbalance = balancedness_residual(net);
  if (imbalance > kBalancednessGuard) {
    std::ostringstream os;
    os << "sigma_dot_predicted: balancedness residual " << imbalance << " exceeds "
       << kBalancednessGuard;
    throw std::domain_error(os.str());
  }
  const auto spec = linalg::svd(net.feature_map());
  if (r >= spec.size()) throw std::out_of_range("sigma_dot_predicted: singular value index");
  const double s = spec.sigma[r];
  const bool close_above = r > 0 && spec.sigma[r - 1] - s < kSimpleGapGuard;
  const bool close_below = r + 1 < spec.size() && s - spec.sigma[r + 1] < kSimpleGapGuard;
  if (close_above || close_below)
    throw DegenerateSpectrumError("repeated singular value; ODE per-value form invalid");
  // Gradient with respect to W_φ is W_Nᵀ·grad; pair it with u_r·v_rᵀ.
  const Matrix feature_grad = linalg::transpose_times(net.last_layer(), end_to_end_grad);
  double projection = 0.0;
  for (std::size_t i = 0; i < feature_grad.rows(); ++i)
    for (std::size_t j = 0; j < feature_grad.cols(); ++j)
      projection += feature_grad(i, j) * spec.left(i, r) * spec.right(j, r);
  const double depth = static_cast<double>(net.depth() - 1);
  return -depth * std::pow(s * s, 1.0 - 1.0 / depth) * projection;
}

double zeta_threshold(std::span<const double> sigma, double delta) {
  const std::size_t r = linalg::srank(sigma, delta);
  if (r == 1)
    throw DegenerateSpectrumError("zeta_threshold: bound requires srank > 1 (got srank 1)");
  const double total = std::accumulate(sigma.begin(), sigma.end(), 0.0);
  const double head = std::accumulate(sigma.begin(), sigma.begin() + static_cast<std::ptrdiff_t>(r), 0.0);
  return std::max(0.0, head - (1.0 - delta) * total) / static_cast<double>(r + sigma.size());
}

double epsilon_zero_bound(const Matrix& w_last, std::span<const double> sigma, double delta) {
  return linalg::infinity_norm(w_last) * zeta_threshold(sigma, delta);
}

}  // namespace rankcollapse::deeplinear
