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
#include <string>
#include <vector>

#include "rankcollapse/linalg/matrix.hpp"
#include "rankcollapse/linalg/rng.hpp"

namespace rankcollapse::nfqi {

using linalg::Matrix;
using linalg::Vector;

struct DenseLayer {
  Matrix weight;  // out × in
  Vector bias;    // out
};

// Activations of one batch, kept for backpropagation. Rows are samples.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // per hidden layer, before the rectifier
  std::vector<Matrix> post;  // per hidden layer, after the rectifier
  Matrix q;                  // batch × n_actions

  // Penultimate activations Φ: the last hidden layer after the rectifier.
  const Matrix& features() const { return post.back(); }
};

// Gradient with the same shapes as the network's layers.
struct MlpGradient {
  std::vector<DenseLayer> layers;

  MlpGradient& operator+=(const MlpGradient& other);
  double squared_norm() const;
};

// Q-network with rectified hidden layers and one linear output per action.
class MlpQNetwork {
 public:
  MlpQNetwork() = default;
  explicit MlpQNetwork(std::vector<DenseLayer> layers);

  // He-style fan-in initialization with zero biases; the output layer uses
  // the same scale.
  static MlpQNetwork he_init(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t n_actions,
                             linalg::Rng& rng);

  std::size_t input_dim() const { return layers_.front().weight.cols(); }
  std::size_t n_actions() const { return layers_.back().weight.rows(); }
  std::size_t feature_dim() const { return layers_.back().weight.cols(); }
  std::size_t parameter_count() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  ForwardCache forward(const Matrix& inputs) const;
  Matrix q_values(const Matrix& inputs) const { return forward(inputs).q; }

  // Gradient of a loss given dL/dQ (batch × n_actions) and, optionally,
  // dL/dΦ on the penultimate activations (batch × feature_dim, or empty).
  MlpGradient backward(const ForwardCache& cache, const Matrix& d_q, const Matrix& d_features = {}) const;

  MlpGradient zero_gradient() const;
  bool all_finite() const;

  // Flat parameter view in layer order (weights row-major, then biases);
  // used by the optimizer and by finite-difference checks.
  std::vector<double*> parameters();
  std::vector<const double*> parameters() const;

  bool operator==(const MlpQNetwork& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

std::vector<double*> gradient_entries(MlpGradient& grad);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const MlpQNetwork& net, AdamConfig cfg);

  void step(MlpQNetwork& net, MlpGradient& grad);
  std::size_t steps_taken() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

inline constexpr int kCheckpointSchemaVersion = 1;

std::string to_json(const MlpQNetwork& net);
// Throws std::runtime_error on schema mismatch or malformed input.
MlpQNetwork network_from_json(const std::string& text);

}  // namespace rankcollapse::nfqi
