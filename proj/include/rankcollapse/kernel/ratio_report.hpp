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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rankcollapse/kernel/normal_matrix.hpp"
#include "rankcollapse/linalg/matrix.hpp"

namespace rankcollapse::kernel {

inline constexpr double kRatioSlack = 1e-10;

enum class PairStatus { checked, equal_singular_values, zero_denominator };

std::string to_string(PairStatus status);

// Ratio history of one pair (small, large) with σ_small(S) <= σ_large(S).
//
// `ratios` holds σ_small(M_k)/σ_large(M_k) with M_k = Σ_{i<k} Sⁱ.
// `shifted_ratios` holds the same ratio for S·M_k = Σ_{1<=i<=k} Sⁱ, whose
// first term equals σ_small(S)/σ_large(S); the upper bound is checked there.
struct PairReport {
  std::size_t small = 0;
  std::size_t large = 0;
  double s_ratio = 0.0;
  PairStatus status = PairStatus::checked;
  std::vector<double> ratios;
  std::vector<double> shifted_ratios;
  std::size_t decreases = 0;
  std::size_t ties = 0;
  std::size_t increases = 0;
  bool within_bound = true;          // shifted ratios <= s_ratio + slack
  bool unshifted_within_bound = true;  // ratios <= s_ratio + slack
};

struct RatioReport {
  std::vector<std::uint64_t> ks;
  std::vector<PairReport> pairs;
  std::vector<std::string> notices;

  std::size_t checked_pairs() const;
  std::size_t total_increases() const;
  std::size_t total_ties() const;
  bool all_decreasing() const { return total_increases() == 0; }
  bool all_within_bound() const;
};

// Pairs index the descending singular values of S; the singular values of
// M_k are matched by sorted position, which is exact when S is PSD. An empty
// pair list selects every pair (small, large) with small > large.
RatioReport ratio_monotonicity_report(const Matrix& s,
                                      std::vector<std::pair<std::size_t, std::size_t>> pairs,
                                      const std::vector<std::uint64_t>& ks);

// Pairs index normal.modes; M_k singular values are measured per mode, so
// the association survives reordering of the spectrum across k. An empty
// pair list selects every pair with |λ_small| <= |λ_large|, each once.
RatioReport ratio_monotonicity_report(const NormalMatrix& normal,
                                      std::vector<std::pair<std::size_t, std::size_t>> pairs,
                                      const std::vector<std::uint64_t>& ks);

// Largest value of measured ratio − f(k) over all mode pairs with
// |λ_small| < |λ_large| and k in 1..k_max. Nonpositive when f dominates.
struct BoundCheck {
  double worst_excess = -1.0;
  std::size_t checked = 0;
};
BoundCheck check_ratio_upper_bound(const NormalMatrix& normal, std::uint64_t k_max);

}  // namespace rankcollapse::kernel
