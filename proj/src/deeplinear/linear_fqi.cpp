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

#include "rankcollapse/deeplinear/linear_fqi.hpp"

#include <cmath>
#include <sstream>

namespace rankcollapse::deeplinear {

void FlowConfig::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("FlowConfig: step must be positive");
  if (steps_per_iteration == 0) throw std::invalid_argument("FlowConfig: steps_per_iteration must be >= 1");
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("FlowConfig: discount must lie in [0, 1)");
  if (svd_trace_stride == 0) throw std::invalid_argument("FlowConfig: svd_trace_stride must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("FlowConfig: delta must lie in (0, 1)");
}

void LinearFqiInputs::validate(std::size_t input_dim) const {
  const std::size_t m = inputs.cols();
  if (inputs.rows() != input_dim) throw linalg::DimensionError("LinearFqiInputs: input rows must equal d_0");
  if (transition.rows() != m || transition.cols() != m)
    throw linalg::DimensionError("LinearFqiInputs: transition must be m x m");
  if (reward.size() != m) throw linalg::DimensionError("LinearFqiInputs: reward length must equal m");
}

Matrix one_hot_inputs(std::size_t pairs) { return Matrix::identity(pairs); }

namespace {

LinearTraceRow measure(const DeepLinearNet& net, const LinearFqiInputs& data, const Vector& targets,
                       const FlowConfig& cfg) {
  LinearTraceRow row;
  const auto sigma = linalg::singular_values(net.feature_map());
  row.srank = linalg::srank(sigma, cfg.delta);
  row.sigma_max = sigma.front();
  row.sigma_ratio = sigma.size() > 1 && sigma[1] > 0.0 ? sigma[0] / sigma[1] : 0.0;
  row.balancedness = balancedness_residual(net);
  const Matrix q = net.end_to_end() * data.inputs;
  double se = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = q(0, i) - targets[i];
    se += r * r;
    sum += q(0, i);
  }
  row.td_error = se / static_cast<double>(targets.size());
  row.mean_q = sum / static_cast<double>(targets.size());
  return row;
}

}  // namespace

LinearRankTrace run_linear_fqi(const DeepLinearNet& initial, const LinearFqiInputs& data,
                               const FlowConfig& cfg, TargetMode mode) {
  cfg.validate();
  data.validate(initial.layers().front().cols());
  LinearRankTrace trace;
  DeepLinearNet net = initial;
  std::size_t global_step = 0;
  for (std::size_t k = 1; k <= cfg.fitting_iterations; ++k) {
    const Matrix q_prev = net.end_to_end() * data.inputs;
    const auto q_row = q_prev.row(0);
    Vector targets(q_row.begin(), q_row.end());
    if (mode == TargetMode::bootstrap) {
      const Vector next = data.transition * q_row;
      for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = data.reward[i] + cfg.discount * next[i];
    }
    for (std::size_t t = 1; t <= cfg.steps_per_iteration; ++t) {
      ++global_step;
      try {
        net = flow_step(net, squared_loss_gradient(net, data.inputs, targets), cfg.step, global_step);
      } catch (const DivergenceError& e) {
        trace.diverged = true;
        trace.diverged_at = e.step();
        trace.final_net = net;
        return trace;
      }
      if (t % cfg.svd_trace_stride == 0 || t == cfg.steps_per_iteration) {
        LinearTraceRow row = measure(net, data, targets, cfg);
        if (!std::isfinite(row.td_error)) {
          trace.diverged = true;
          trace.diverged_at = global_step;
          trace.final_net = net;
          return trace;
        }
        row.iteration = k;
        row.step = t;
        trace.rows.push_back(row);
      }
    }
  }
  trace.final_net = net;
  return trace;
}

}  // namespace rankcollapse::deeplinear
