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
#include <numeric>

#include "families.hpp"
#include "rankcollapse/kernel/kernel_model.hpp"
#include "rankcollapse/kernel/normal_matrix.hpp"
#include "rankcollapse/kernel/ratio_report.hpp"
#include "rankcollapse/linalg/solve.hpp"
#include "rankcollapse/linalg/svd.hpp"

namespace rankcollapse::experiment::detail {

namespace {

struct StepCounts {
  double increases = 0.0;
  double ties = 0.0;
  double missed = 0.0;
};

// Exact decreases shrink geometrically in k and drop below what a measured
// ratio can resolve; a tie only counts as missed when the closed-form
// decrease is at least this large.
constexpr double kResolvableDecrease = 1e-9;

// Ratio movement between entry i−1 and i, over pairs whose singular values
// of S differ. exact(pair, i) gives the closed-form ratio at entry i.
template <class Exact>
StepCounts ratio_step(const kernel::RatioReport& report, std::size_t i, Exact exact) {
  StepCounts out;
  if (i == 0) return out;
  for (const auto& pair : report.pairs) {
    if (pair.status != kernel::PairStatus::checked) continue;
    const double diff = pair.ratios[i] - pair.ratios[i - 1];
    if (diff > kernel::kRatioSlack) {
      out.increases += 1.0;
    } else if (diff >= -kernel::kRatioSlack) {
      out.ties += 1.0;
      if (exact(pair, i - 1) - exact(pair, i) >= kResolvableDecrease) out.missed += 1.0;
    }
  }
  return out;
}

// σ(M_k) = (1 − λᵏ)/(1 − λ) for an eigenvalue λ in [0, 1) of PSD S.
double psd_gain(double lambda, std::uint64_t k) {
  return (1.0 - std::pow(lambda, static_cast<double>(k))) / (1.0 - lambda);
}

}  // namespace

void check_kernel(const Config& cfg) {
  if (cfg.contains("kernel.dim_min")) {
    if (cfg.get_size("kernel.dim_min") < 2) throw ConfigError("kernel.dim_min", "must be >= 2");
    if (cfg.get_size("kernel.dim_max") < cfg.get_size("kernel.dim_min"))
      throw ConfigError("kernel.dim_max", "must be >= kernel.dim_min");
    if (cfg.get_size("kernel.k_max") < 2) throw ConfigError("kernel.k_max", "must be >= 2");
    const double eig = cfg.get_double("kernel.max_eigenvalue");
    if (!(eig > 0.0 && eig < 1.0)) throw ConfigError("kernel.max_eigenvalue", "must lie in (0, 1)");
  }
  if (cfg.contains("normal.blocks")) {
    if (cfg.get_size("normal.blocks") < 1) throw ConfigError("normal.blocks", "must be >= 1");
    if (cfg.get_size("normal.max_denominator") < 1) throw ConfigError("normal.max_denominator", "must be >= 1");
    if (cfg.get_size("normal.subsequence_length") < 2)
      throw ConfigError("normal.subsequence_length", "must be >= 2");
  }
}

TraceFile kernel_psd_trace(const Config& cfg, std::uint64_t seed) {
  const std::size_t dim_min = cfg.get_size("kernel.dim_min");
  const std::size_t dim_max = cfg.get_size("kernel.dim_max");
  const std::size_t k_max = cfg.get_size("kernel.k_max");
  const double delta = cfg.get_double("kernel.delta");

  linalg::Rng rng(seed);
  const std::size_t n = dim_min + rng.below(dim_max - dim_min + 1);
  const linalg::Matrix s = kernel::random_psd_distinct(n, cfg.get_double("kernel.max_eigenvalue"), rng);
  const auto spectra = kernel::m_spectrum_trace(s, k_max, delta);
  std::vector<std::uint64_t> ks(k_max);
  std::iota(ks.begin(), ks.end(), std::uint64_t{1});
  const auto report = kernel::ratio_monotonicity_report(s, {}, ks);
  // S is symmetric PSD, so its singular values are its eigenvalues.
  const auto eigenvalues = linalg::singular_values(s);

  TraceFile trace;
  trace.columns = columns_for("kernel-psd");
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const auto& point = spectra[i];
    const double energy_at_prev =
        i == 0 ? std::numeric_limits<double>::quiet_NaN()
               : linalg::cumulative_energy(point.sigma)[spectra[i - 1].srank - 1];
    double excess = -std::numeric_limits<double>::infinity();
    for (const auto& pair : report.pairs)
      if (pair.status == kernel::PairStatus::checked)
        excess = std::max(excess, pair.shifted_ratios[i] - pair.s_ratio);
    const StepCounts counts = ratio_step(report, i, [&](const kernel::PairReport& pair, std::size_t j) {
      return psd_gain(eigenvalues[pair.small], ks[j]) / psd_gain(eigenvalues[pair.large], ks[j]);
    });
    trace.rows.push_back({static_cast<double>(point.k), static_cast<double>(point.srank), energy_at_prev,
                          point.sigma.front(), point.sigma.back(), counts.increases, counts.ties, counts.missed,
                          excess});
  }
  return trace;
}

TraceFile kernel_normal_trace(const Config& cfg, std::uint64_t seed) {
  const auto spec = kernel::random_normal_spec(cfg.get_size("normal.blocks"), cfg.get_size("normal.reals"),
                                               cfg.get_size("normal.max_denominator"), seed);
  const auto normal = kernel::build_normal_matrix(spec);
  const auto ks = kernel::psd_subsequence(spec, cfg.get_size("normal.subsequence_length"));
  const auto report = kernel::ratio_monotonicity_report(normal, {}, ks);
  const auto bound = kernel::check_ratio_upper_bound(normal, cfg.get_size("normal.bound_k_max"));
  const double psd_tol = cfg.get_double("normal.psd_tol");
  const double delta = cfg.get_double("normal.delta");

  TraceFile trace;
  trace.columns = columns_for("kernel-normal");
  for (std::size_t l = 0; l < ks.size(); ++l) {
    const linalg::Matrix power = linalg::matrix_power(normal.matrix, ks[l]);
    const auto sigma = linalg::singular_values(linalg::matrix_power_sum(normal.matrix, ks[l]));
    const StepCounts counts = ratio_step(report, l, [&](const kernel::PairReport& pair, std::size_t j) {
      return kernel::mode_gain_closed_form(normal.modes[pair.small].eigenvalue, ks[j]) /
             kernel::mode_gain_closed_form(normal.modes[pair.large].eigenvalue, ks[j]);
    });
    trace.rows.push_back({static_cast<double>(l + 1), static_cast<double>(ks[l]),
                          static_cast<double>(linalg::srank(sigma, delta)),
                          linalg::is_positive_semidefinite(power, psd_tol) ? 1.0 : 0.0,
                          linalg::symmetry_residual(power), counts.increases, counts.ties, counts.missed,
                          bound.worst_excess});
  }
  return trace;
}

}  // namespace rankcollapse::experiment::detail
