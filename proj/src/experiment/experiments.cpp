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

#include "rankcollapse/experiment/experiments.hpp"

#include <algorithm>

#include "families.hpp"

namespace rankcollapse::experiment {

namespace {

using K = ValueKind;

std::vector<KeySpec> common_keys(std::string seeds, std::string arms, std::vector<std::string> arm_choices) {
  return {{"experiment", K::string, "", {}},
          {"seeds", K::seeds, std::move(seeds), {}},
          {"arms", K::list, std::move(arms), std::move(arm_choices)},
          {"output", K::string, "", {}}};
}

std::vector<KeySpec> grid_keys(std::string arms, std::vector<std::string> arm_choices) {
  auto keys = common_keys("1..5", std::move(arms), std::move(arm_choices));
  const std::vector<KeySpec> extra = {
      {"grid.side", K::integer, "16", {}},
      {"grid.wall_prob", K::real, "0.2", {}},
      {"grid.discount", K::real, "0.95", {}},
      {"grid.feature_dim", K::size, "64", {}},
      {"grid.smoothing_radius", K::integer, "1", {}},
      {"grid.seed", K::integer, "1", {}},
      {"dataset.size", K::size, "4096", {}},
      {"dataset.episode_length", K::size, "50", {}},
      {"fqi.iterations", K::size, "500", {}},
      {"fqi.short_steps", K::size, "10", {}},
      {"fqi.long_steps", K::size, "200", {}},
      {"fqi.batch_size", K::size, "32", {}},
      {"fqi.learning_rate", K::real, "0.001", {}},
      {"fqi.backup", K::string, "soft", {"hard_max", "soft"}},
      {"fqi.temperature", K::real, "0.1", {}},
      {"fqi.srank_batch", K::size, "2048", {}},
      {"fqi.delta", K::real, "0.01", {}},
      {"fqi.trace_every", K::size, "20", {}},
      {"fqi.hidden", K::sizes, "64,64", {}},
      {"penalty.alpha", K::real, "0.001", {}},
      {"mc.rollouts", K::size, "100", {}},
      {"online.iterations", K::size, "100", {}},
      {"online.env_steps_per_iteration", K::size, "100", {}},
      {"online.buffer_capacity", K::size, "10000", {}},
      {"online.epsilon", K::real, "0.1", {}},
      {"online.episode_length", K::size, "50", {}},
  };
  keys.insert(keys.end(), extra.begin(), extra.end());
  return keys;
}

std::vector<ExperimentInfo> build_registry() {
  std::vector<ExperimentInfo> out;

  auto psd = common_keys("1..50", "psd", {"psd"});
  psd.insert(psd.end(), {{"kernel.dim_min", K::size, "4", {}},
                         {"kernel.dim_max", K::size, "64", {}},
                         {"kernel.k_max", K::size, "50", {}},
                         {"kernel.max_eigenvalue", K::real, "0.95", {}},
                         {"kernel.delta", K::real, "0.01", {}}});
  out.push_back({"kernel-psd", "srank and singular-value ratios of M_k for random PSD S", std::move(psd)});

  auto normal = common_keys("1..10", "normal", {"normal"});
  normal.insert(normal.end(), {{"normal.blocks", K::size, "3", {}},
                               {"normal.reals", K::size, "1", {}},
                               {"normal.max_denominator", K::size, "5", {}},
                               {"normal.subsequence_length", K::size, "6", {}},
                               {"normal.bound_k_max", K::size, "60", {}},
                               {"normal.psd_tol", K::real, "1e-9", {}},
                               {"normal.delta", K::real, "0.01", {}}});
  out.push_back({"kernel-normal", "normal S with rational angles along the PSD subsequence", std::move(normal)});

  auto flow = common_keys("1..20", "euler", {"euler"});
  flow.insert(flow.end(), {{"flow.depths", K::sizes, "3,4", {}},
                           {"flow.width", K::size, "6", {}},
                           {"flow.step", K::real, "0.02", {}},
                           {"flow.steps_per_iteration", K::size, "250", {}},
                           {"flow.iterations", K::size, "4", {}},
                           {"flow.stride", K::size, "25", {}},
                           {"flow.discount", K::real, "0.95", {}},
                           {"flow.delta", K::real, "0.01", {}},
                           {"flow.sigma_min", K::real, "0.5", {}},
                           {"flow.sigma_max", K::real, "1.5", {}},
                           {"flow.ode_step", K::real, "1e-4", {}},
                           {"flow.drift_constant", K::real, "0.2", {}}});
  out.push_back({"linear-flow", "balancedness drift at step η and η/2, and the singular-value ODE check",
                 std::move(flow)});

  auto linear = common_keys("1..5", "bootstrap,self_training", {"bootstrap", "self_training"});
  linear.insert(linear.end(), {{"linear.pairs", K::size, "8", {}},
                               {"linear.depth", K::size, "3", {}},
                               {"linear.step", K::real, "0.01", {}},
                               {"linear.steps_per_iteration", K::size, "500", {}},
                               {"linear.iterations", K::size, "20", {}},
                               {"linear.stride", K::size, "50", {}},
                               {"linear.discount", K::real, "0.95", {}},
                               {"linear.delta", K::real, "0.01", {}},
                               {"linear.sigma_min", K::real, "0.5", {}},
                               {"linear.sigma_max", K::real, "1.5", {}}});
  out.push_back({"linear-fqi", "deep linear FQI rank traces under bootstrap and self-training targets",
                 std::move(linear)});

  out.push_back({"grid-offline", "offline neural FQI with T=10 and T=200 against supervised Q* regression",
                 grid_keys("t10,t200,qstar", {"t10", "t200", "qstar"})});
  out.push_back({"grid-online", "online neural FQI with 1 and 4 gradient steps per environment step",
                 grid_keys("n1,n4", {"n1", "n4"})});
  out.push_back({"grid-penalty", "offline FQI with and without the L_p penalty",
                 grid_keys("t200,lp", {"t200", "lp"})});
  out.push_back({"grid-ablations", "Monte-Carlo regression, FQE and per-iteration re-initialization",
                 grid_keys("mc,fqe,reinit", {"mc", "fqe", "reinit"})});
  return out;
}

void check_value(const Config& cfg, const KeySpec& spec) {
  switch (spec.kind) {
    case K::string:
      break;
    case K::integer:
      cfg.get_int(spec.key);
      break;
    case K::size:
      cfg.get_size(spec.key);
      break;
    case K::real:
      cfg.get_double(spec.key);
      break;
    case K::boolean:
      cfg.get_bool(spec.key);
      break;
    case K::seeds:
      cfg.get_seeds(spec.key);
      break;
    case K::sizes:
      cfg.get_sizes(spec.key);
      break;
    case K::list:
      if (cfg.get_list(spec.key).empty()) throw ConfigError(spec.key, "empty list");
      break;
  }
  if (spec.choices.empty()) return;
  const auto items = spec.kind == K::list ? cfg.get_list(spec.key) : std::vector<std::string>{cfg.raw(spec.key)};
  for (const auto& item : items) {
    if (std::find(spec.choices.begin(), spec.choices.end(), item) != spec.choices.end()) continue;
    std::string allowed;
    for (const auto& c : spec.choices) allowed += (allowed.empty() ? "" : ", ") + c;
    throw ConfigError(spec.key, "'" + item + "' is not one of: " + allowed);
  }
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> registry = build_registry();
  return registry;
}

const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& info : experiment_registry())
    if (info.name == name) return info;
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

Config resolve_config(const Config& user) {
  const ExperimentInfo& info = find_experiment(user.raw("experiment"));
  Config resolved;
  for (const auto& spec : info.keys) resolved.set(spec.key, spec.default_value);
  for (const auto& [key, value] : user.values()) {
    if (!resolved.contains(key)) throw ConfigError(key, "unknown key for experiment " + info.name);
    resolved.set(key, value);
  }
  for (const auto& spec : info.keys) check_value(resolved, spec);
  detail::check_kernel(resolved);
  detail::check_flow(resolved);
  detail::check_grid(resolved);
  return resolved;
}

TraceFile run_arm(const Config& resolved, const std::string& arm, std::uint64_t seed) {
  const std::string& name = resolved.raw("experiment");
  TraceFile trace;
  if (name == "kernel-psd") {
    trace = detail::kernel_psd_trace(resolved, seed);
  } else if (name == "kernel-normal") {
    trace = detail::kernel_normal_trace(resolved, seed);
  } else if (name == "linear-flow") {
    trace = detail::linear_flow_trace(resolved, seed);
  } else if (name == "linear-fqi") {
    trace = detail::linear_fqi_trace(resolved, arm, seed);
  } else {
    find_experiment(name);
    trace = detail::grid_trace(resolved, arm, seed);
  }
  trace.experiment = name;
  trace.arm = arm;
  trace.seed = seed;
  trace.config = resolved;
  return trace;
}

}  // namespace rankcollapse::experiment
