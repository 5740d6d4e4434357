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

#include <algorithm>
#include <cmath>
#include <limits>

#include "families.hpp"
#include "rankcollapse/deeplinear/deep_linear.hpp"
#include "rankcollapse/deeplinear/linear_fqi.hpp"
#include "rankcollapse/kernel/kernel_model.hpp"
#include "rankcollapse/linalg/svd.hpp"

namespace rankcollapse::experiment::detail {

namespace {

using deeplinear::DeepLinearNet;
using deeplinear::FlowConfig;
using deeplinear::LinearFqiInputs;
using linalg::Matrix;

struct FlowSetup {
  DeepLinearNet net;
  LinearFqiInputs data;
};

// Balanced net of the given depth over one-hot inputs for `width` pairs, on
// a ring chain with rewards in [-1, 0].
FlowSetup flow_setup(std::size_t depth, std::size_t width, double sigma_lo, double sigma_hi, std::uint64_t seed) {
  linalg::Rng rng(seed);
  std::vector<std::size_t> dims(depth, width);
  dims.push_back(1);
  std::vector<double> sigma(width);
  for (double& s : sigma) s = rng.uniform(sigma_lo, sigma_hi);
  auto net = deeplinear::balanced_init(dims, sigma, rng);
  LinearFqiInputs data;
  data.inputs = deeplinear::one_hot_inputs(width);
  data.transition = kernel::chain_transition(width, rng);
  data.reward.resize(width);
  for (double& r : data.reward) r = rng.uniform(-1.0, 0.0);
  return {std::move(net), std::move(data)};
}

// Worst relative gap between the predicted σ̇_r and a central difference of
// two Euler steps of size h, over the simple singular values at the
// bootstrapped TD gradient of the initial net.
double ode_max_rel_err(const FlowSetup& setup, double discount, double h) {
  const Matrix q0 = setup.net.end_to_end() * setup.data.inputs;
  linalg::Vector targets = setup.data.reward;
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (std::size_t j = 0; j < targets.size(); ++j) targets[i] += discount * setup.data.transition(i, j) * q0(0, j);
  const Matrix grad = deeplinear::squared_loss_gradient(setup.net, setup.data.inputs, targets);
  const auto after = linalg::singular_values(deeplinear::flow_step(setup.net, grad, h).feature_map());
  const auto before = linalg::singular_values(deeplinear::flow_step(setup.net, -1.0 * grad, h).feature_map());
  double worst = 0.0;
  for (std::size_t r = 0; r < after.size(); ++r) {
    double predicted = 0.0;
    try {
      predicted = deeplinear::sigma_dot_predicted(setup.net, grad, r);
    } catch (const deeplinear::DegenerateSpectrumError&) {
      continue;
    }
    const double fd = (after[r] - before[r]) / (2.0 * h);
    worst = std::max(worst, std::abs(predicted - fd) / std::max(std::abs(predicted), 1e-12));
  }
  return worst;
}

FlowConfig flow_config(const Config& cfg, const std::string& prefix) {
  FlowConfig out;
  out.step = cfg.get_double(prefix + ".step");
  out.steps_per_iteration = cfg.get_size(prefix + ".steps_per_iteration");
  out.fitting_iterations = cfg.get_size(prefix + ".iterations");
  out.svd_trace_stride = cfg.get_size(prefix + ".stride");
  out.discount = cfg.get_double(prefix + ".discount");
  out.delta = cfg.get_double(prefix + ".delta");
  return out;
}

void check_flow_prefix(const Config& cfg, const std::string& prefix) {
  try {
    flow_config(cfg, prefix).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(prefix, e.what());
  }
  if (!(cfg.get_double(prefix + ".sigma_min") > 0.0 &&
        cfg.get_double(prefix + ".sigma_min") <= cfg.get_double(prefix + ".sigma_max")))
    throw ConfigError(prefix + ".sigma_min", "must be positive and <= " + prefix + ".sigma_max");
}

}  // namespace

void check_flow(const Config& cfg) {
  if (cfg.contains("flow.step")) {
    check_flow_prefix(cfg, "flow");
    for (std::size_t d : cfg.get_sizes("flow.depths"))
      if (d < 3) throw ConfigError("flow.depths", "every depth must be >= 3");
    if (cfg.get_sizes("flow.depths").empty()) throw ConfigError("flow.depths", "empty list");
    if (cfg.get_size("flow.width") < 2) throw ConfigError("flow.width", "must be >= 2");
    if (!(cfg.get_double("flow.ode_step") > 0.0)) throw ConfigError("flow.ode_step", "must be positive");
  }
  if (cfg.contains("linear.step")) {
    check_flow_prefix(cfg, "linear");
    if (cfg.get_size("linear.depth") < 3) throw ConfigError("linear.depth", "must be >= 3");
    if (cfg.get_size("linear.pairs") < 2) throw ConfigError("linear.pairs", "must be >= 2");
  }
}

// Runs the same flow at step η and η/2 over equal flow time. Rows pair the
// two runs at matching times; the ODE check is a per-seed constant measured
// at the initial net.
TraceFile linear_flow_trace(const Config& cfg, std::uint64_t seed) {
  const auto depths = cfg.get_sizes("flow.depths");
  const std::size_t depth = depths[seed % depths.size()];
  const FlowSetup setup = flow_setup(depth, cfg.get_size("flow.width"), cfg.get_double("flow.sigma_min"),
                                     cfg.get_double("flow.sigma_max"), seed);
  const FlowConfig coarse = flow_config(cfg, "flow");
  FlowConfig fine = coarse;
  fine.step /= 2.0;
  fine.steps_per_iteration *= 2;
  fine.svd_trace_stride *= 2;
  const auto coarse_trace = deeplinear::run_linear_fqi(setup.net, setup.data, coarse, deeplinear::TargetMode::bootstrap);
  const auto fine_trace = deeplinear::run_linear_fqi(setup.net, setup.data, fine, deeplinear::TargetMode::bootstrap);
  const double ode = ode_max_rel_err(setup, coarse.discount, cfg.get_double("flow.ode_step"));

  TraceFile trace;
  trace.columns = columns_for("linear-flow");
  trace.diverged = coarse_trace.diverged || fine_trace.diverged;
  const std::size_t n = std::min(coarse_trace.rows.size(), fine_trace.rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = coarse_trace.rows[i];
    const std::size_t step = (row.iteration - 1) * coarse.steps_per_iteration + row.step;
    trace.rows.push_back({static_cast<double>(step) * coarse.step, static_cast<double>(step),
                          static_cast<double>(row.srank), row.balancedness, fine_trace.rows[i].balancedness, ode});
  }
  return trace;
}

TraceFile linear_fqi_trace(const Config& cfg, const std::string& arm, std::uint64_t seed) {
  const FlowSetup setup = flow_setup(cfg.get_size("linear.depth"), cfg.get_size("linear.pairs"),
                                     cfg.get_double("linear.sigma_min"), cfg.get_double("linear.sigma_max"), seed);
  const auto mode = arm == "self_training" ? deeplinear::TargetMode::self_training : deeplinear::TargetMode::bootstrap;
  const auto result = deeplinear::run_linear_fqi(setup.net, setup.data, flow_config(cfg, "linear"), mode);
  TraceFile trace;
  trace.columns = columns_for("linear-fqi");
  trace.diverged = result.diverged;
  for (const auto& row : result.rows)
    trace.rows.push_back({static_cast<double>(row.iteration), static_cast<double>(row.step),
                          static_cast<double>(row.srank), row.td_error, row.balancedness, row.sigma_max,
                          row.sigma_ratio, row.mean_q});
  return trace;
}

}  // namespace rankcollapse::experiment::detail
