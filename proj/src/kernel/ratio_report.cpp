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

#include "rankcollapse/kernel/ratio_report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rankcollapse/linalg/svd.hpp"

namespace rankcollapse::kernel {

namespace {

using PairList = std::vector<std::pair<std::size_t, std::size_t>>;

void validate_ks(const std::vector<std::uint64_t>& ks) {
  if (ks.empty()) throw std::invalid_argument("ratio report: iteration list is empty");
  if (ks.front() < 1) throw std::invalid_argument("ratio report: iterations start at k = 1");
  for (std::size_t t = 1; t < ks.size(); ++t)
    if (ks[t] <= ks[t - 1]) throw std::invalid_argument("ratio report: iterations must increase");
}

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

// Populates status and s_ratio; returns false when the pair is skipped.
bool classify(PairReport& pr, double sigma_small, double sigma_large, RatioReport& report) {
  if (sigma_large == 0.0) {
    pr.status = PairStatus::zero_denominator;
    std::ostringstream os;
    os << "pair (" << pr.small << ", " << pr.large << ") skipped: larger singular value of S is 0";
    report.notices.push_back(os.str());
    return false;
  }
  pr.s_ratio = sigma_small / sigma_large;
  if (nearly_equal(sigma_small, sigma_large)) {
    pr.status = PairStatus::equal_singular_values;
    std::ostringstream os;
    os << "pair (" << pr.small << ", " << pr.large
       << "): equal singular values, bound holds with equality";
    report.notices.push_back(os.str());
  }
  return true;
}

void record(PairReport& pr, double ratio, double shifted) {
  if (!pr.ratios.empty()) {
    const double diff = ratio - pr.ratios.back();
    if (diff < -kRatioSlack) {
      ++pr.decreases;
    } else if (diff > kRatioSlack) {
      ++pr.increases;
    } else {
      ++pr.ties;
    }
  }
  pr.ratios.push_back(ratio);
  pr.shifted_ratios.push_back(shifted);
  if (shifted > pr.s_ratio + kRatioSlack) pr.within_bound = false;
  if (ratio > pr.s_ratio + kRatioSlack) pr.unshifted_within_bound = false;
}

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

// Calls visit(k, m_k) for each k in ks, accumulating M_k by recurrence.
template <typename Visit>
void walk_m(const Matrix& s, const std::vector<std::uint64_t>& ks, Visit visit) {
  const Matrix eye = Matrix::identity(s.rows());
  Matrix m = eye;
  std::uint64_t k = 1;
  for (std::uint64_t target : ks) {
    for (; k < target; ++k) m = eye + s * m;
    visit(target, m);
  }
}

}  // namespace

std::string to_string(PairStatus status) {
  switch (status) {
    case PairStatus::checked:
      return "checked";
    case PairStatus::equal_singular_values:
      return "equal singular values";
    case PairStatus::zero_denominator:
      return "zero denominator";
  }
  return "unknown";
}

std::size_t RatioReport::checked_pairs() const {
  return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const auto& p) {
    return p.status == PairStatus::checked;
  }));
}

std::size_t RatioReport::total_increases() const {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.increases;
  return n;
}

std::size_t RatioReport::total_ties() const {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.ties;
  return n;
}

bool RatioReport::all_within_bound() const {
  return std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.within_bound; });
}

RatioReport ratio_monotonicity_report(const Matrix& s, PairList pairs,
                                      const std::vector<std::uint64_t>& ks) {
  if (!s.is_square()) throw linalg::DimensionError("ratio_monotonicity_report: S must be square");
  validate_ks(ks);
  const auto sigma_s = linalg::singular_values(s);
  const std::size_t n = sigma_s.size();
  if (pairs.empty()) {
    for (std::size_t large = 0; large < n; ++large)
      for (std::size_t small = large + 1; small < n; ++small) pairs.emplace_back(small, large);
  }
  RatioReport report;
  report.ks = ks;
  std::vector<std::size_t> active;
  for (const auto& [small, large] : pairs) {
    if (small >= n || large >= n) throw std::out_of_range("ratio_monotonicity_report: pair index");
    PairReport pr;
    pr.small = small;
    pr.large = large;
    if (classify(pr, sigma_s[small], sigma_s[large], report)) active.push_back(report.pairs.size());
    report.pairs.push_back(std::move(pr));
  }
  walk_m(s, ks, [&](std::uint64_t, const Matrix& m) {
    const auto sigma_m = linalg::singular_values(m);
    const auto sigma_sm = linalg::singular_values(s * m);
    for (std::size_t idx : active) {
      auto& pr = report.pairs[idx];
      record(pr, safe_ratio(sigma_m[pr.small], sigma_m[pr.large]),
             safe_ratio(sigma_sm[pr.small], sigma_sm[pr.large]));
    }
  });
  return report;
}

RatioReport ratio_monotonicity_report(const NormalMatrix& normal, PairList pairs,
                                      const std::vector<std::uint64_t>& ks) {
  validate_ks(ks);
  const auto& modes = normal.modes;
  if (pairs.empty()) {
    for (std::size_t a = 0; a < modes.size(); ++a)
      for (std::size_t b = 0; b < modes.size(); ++b)
        if (modes[a].modulus() < modes[b].modulus() ||
            (a > b && modes[a].modulus() == modes[b].modulus()))
          pairs.emplace_back(a, b);
  }
  RatioReport report;
  report.ks = ks;
  std::vector<std::size_t> active;
  for (const auto& [small, large] : pairs) {
    if (small >= modes.size() || large >= modes.size())
      throw std::out_of_range("ratio_monotonicity_report: mode index");
    PairReport pr;
    pr.small = small;
    pr.large = large;
    if (classify(pr, modes[small].modulus(), modes[large].modulus(), report))
      active.push_back(report.pairs.size());
    report.pairs.push_back(std::move(pr));
  }
  walk_m(normal.matrix, ks, [&](std::uint64_t, const Matrix& m) {
    const auto gains = mode_gains(normal, m);
    const auto shifted = mode_gains(normal, normal.matrix * m);
    for (std::size_t idx : active) {
      auto& pr = report.pairs[idx];
      record(pr, safe_ratio(gains[pr.small], gains[pr.large]),
             safe_ratio(shifted[pr.small], shifted[pr.large]));
    }
  });
  return report;
}

BoundCheck check_ratio_upper_bound(const NormalMatrix& normal, std::uint64_t k_max) {
  BoundCheck result;
  result.worst_excess = -std::numeric_limits<double>::infinity();
  const auto& modes = normal.modes;
  const Matrix eye = Matrix::identity(normal.matrix.rows());
  Matrix m = eye;
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    if (k > 1) m = eye + normal.matrix * m;
    const auto gains = mode_gains(normal, m);
    for (std::size_t a = 0; a < modes.size(); ++a) {
      for (std::size_t b = 0; b < modes.size(); ++b) {
        if (!(modes[a].modulus() < modes[b].modulus()) || gains[b] == 0.0) continue;
        const double bound = ratio_upper_bound(modes[a].eigenvalue, modes[b].eigenvalue, k);
        result.worst_excess = std::max(result.worst_excess, gains[a] / gains[b] - bound);
        ++result.checked;
      }
    }
  }
  return result;
}

}  // namespace rankcollapse::kernel
