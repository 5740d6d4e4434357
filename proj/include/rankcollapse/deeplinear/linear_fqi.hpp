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
#include <optional>
#include <vector>

#include "rankcollapse/deeplinear/deep_linear.hpp"

namespace rankcollapse::deeplinear {

struct FlowConfig {
  double step = 1e-4;
  std::size_t steps_per_iteration = 1000;
  std::size_t fitting_iterations = 10;
  double discount = 0.95;
  std::size_t svd_trace_stride = 100;
  double delta = 0.01;

  void validate() const;
};

enum class TargetMode { bootstrap, self_training };

// Policy-evaluation data over m state-action pairs.
struct LinearFqiInputs {
  Matrix inputs;      // d_0 × m, one column [s; a] per pair
  Matrix transition;  // m × m, Pπ over pairs
  Vector reward;      // m

  void validate(std::size_t input_dim) const;
};

// One-hot inputs for m pairs (d_0 = m), which have full column rank.
Matrix one_hot_inputs(std::size_t pairs);

struct LinearTraceRow {
  std::size_t iteration = 0;
  std::size_t step = 0;  // within the iteration, after the update
  std::size_t srank = 0;
  double td_error = 0.0;  // mean (Q − y)² against the frozen targets
  double balancedness = 0.0;
  double sigma_max = 0.0;
  double sigma_ratio = 0.0;  // σ_1/σ_2 of W_φ, 0 when σ_2 = 0
  double mean_q = 0.0;
};

struct LinearRankTrace {
  std::vector<LinearTraceRow> rows;
  bool diverged = false;
  std::size_t diverged_at = 0;  // global step index
  std::optional<DeepLinearNet> final_net;
};

// K fitting iterations of T Euler steps on the squared TD loss. Bootstrap
// targets are R + γ·Pπ·Q_{k−1}; self-training targets are Q_{k−1}. A row is
// recorded every svd_trace_stride steps and at the end of each iteration.
LinearRankTrace run_linear_fqi(const DeepLinearNet& net, const LinearFqiInputs& data,
                               const FlowConfig& cfg, TargetMode mode);

}  // namespace rankcollapse::deeplinear
