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

#include "rankcollapse/kernel/normal_matrix.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rankcollapse/linalg/rng.hpp"

namespace rankcollapse::kernel {

namespace {

constexpr std::uint64_t kPeriodLimit = std::uint64_t{1} << 62;

std::uint64_t checked_lcm(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t g = std::gcd(a, b);
  const std::uint64_t reduced = a / g;
  if (reduced > kPeriodLimit / b) {
    throw std::overflow_error(
        "angle period exceeds 2^62; use rational angles with smaller denominators");
  }
  return reduced * b;
}

}  // namespace

double RationalAngle::radians() const {
  return 2.0 * std::numbers::pi * static_cast<double>(num) / static_cast<double>(den);
}

void NormalMatrixSpec::validate() const {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    std::ostringstream where;
    where << "NormalMatrixSpec block " << b << ": ";
    if (blk.angle.den < 1) throw std::invalid_argument(where.str() + "denominator must be >= 1");
    if (blk.angle.num >= blk.angle.den)
      throw std::invalid_argument(where.str() + "numerator must be < denominator");
    if (std::gcd(blk.angle.num, blk.angle.den) != 1)
      throw std::invalid_argument(where.str() + "angle must be in lowest terms");
    if (!(blk.modulus >= 0.0 && blk.modulus < 1.0))
      throw std::invalid_argument(where.str() + "modulus must lie in [0, 1)");
  }
  for (double v : real_values) {
    if (!(std::abs(v) < 1.0))
      throw std::invalid_argument("NormalMatrixSpec: real values must have modulus < 1");
  }
}

NormalMatrix build_normal_matrix(const NormalMatrixSpec& spec) {
  spec.validate();
  const std::size_t n = spec.dimension();
  Matrix block(n, n);
  NormalMatrix out;
  std::size_t at = 0;
  for (const auto& blk : spec.blocks) {
    const double theta = blk.angle.radians();
    // Exact values at the angles whose cos/sin are exactly representable.
    double c = std::cos(theta);
    double s = std::sin(theta);
    if (blk.angle.num == 0) {
      c = 1.0;
      s = 0.0;
    } else if (2 * blk.angle.num == blk.angle.den) {
      c = -1.0;
      s = 0.0;
    }
    block(at, at) = blk.modulus * c;
    block(at, at + 1) = -blk.modulus * s;
    block(at + 1, at) = blk.modulus * s;
    block(at + 1, at + 1) = blk.modulus * c;
    const std::complex<double> eig(blk.modulus * c, blk.modulus * std::abs(s));
    if (s == 0.0) {
      // A real double eigenvalue: two independent one-dimensional modes.
      out.modes.push_back({eig, {at}});
      out.modes.push_back({eig, {at + 1}});
    } else {
      out.modes.push_back({eig, {at, at + 1}});
    }
    at += 2;
  }
  for (double v : spec.real_values) {
    block(at, at) = v;
    out.modes.push_back({std::complex<double>(v, 0.0), {at}});
    ++at;
  }
  if (spec.conjugator_seed) {
    linalg::Rng rng(*spec.conjugator_seed);
    out.conjugator = linalg::random_orthogonal(n, rng);
  } else {
    out.conjugator = Matrix::identity(n);
  }
  out.matrix = linalg::times_transpose(out.conjugator * block, out.conjugator);
  return out;
}

std::uint64_t angle_period(const NormalMatrixSpec& spec) {
  spec.validate();
  std::uint64_t period = 1;
  for (const auto& blk : spec.blocks) period = checked_lcm(period, blk.angle.den);
  for (double v : spec.real_values)
    if (v < 0.0) period = checked_lcm(period, 2);
  return period;
}

std::vector<std::uint64_t> psd_subsequence(const NormalMatrixSpec& spec, std::size_t count) {
  const std::uint64_t period = angle_period(spec);
  std::vector<std::uint64_t> ks;
  ks.reserve(count);
  for (std::uint64_t l = 1; l <= count; ++l) {
    if (period > kPeriodLimit / l) throw std::overflow_error("psd_subsequence: k_l exceeds 2^62");
    ks.push_back(l * period);
  }
  return ks;
}

std::vector<double> mode_gains(const NormalMatrix& normal, const Matrix& m_k) {
  std::vector<double> gains;
  gains.reserve(normal.modes.size());
  for (const auto& mode : normal.modes) {
    const auto q = normal.conjugator.col(mode.columns.front());
    gains.push_back(linalg::norm2(m_k * q));
  }
  return gains;
}

double mode_gain_closed_form(std::complex<double> eigenvalue, std::uint64_t k) {
  const std::complex<double> one(1.0, 0.0);
  if (std::abs(one - eigenvalue) == 0.0) return static_cast<double>(k);
  return std::abs(one - std::pow(eigenvalue, static_cast<double>(k))) / std::abs(one - eigenvalue);
}

double ratio_upper_bound(std::complex<double> small, std::complex<double> large, std::uint64_t k) {
  const double kk = static_cast<double>(k);
  const std::complex<double> one(1.0, 0.0);
  const double num = 1.0 + std::pow(std::abs(small), kk);
  const double den = std::abs(1.0 - std::pow(std::abs(large), kk));
  return num / den * std::abs(one - large) / std::abs(one - small);
}

NormalMatrixSpec random_normal_spec(std::size_t blocks, std::size_t reals, std::uint64_t max_den,
                                    std::uint64_t seed) {
  if (max_den < 1) throw std::invalid_argument("random_normal_spec: max_den must be >= 1");
  linalg::Rng rng(seed);
  NormalMatrixSpec spec;
  for (std::size_t b = 0; b < blocks; ++b) {
    RotationBlock blk;
    blk.modulus = rng.uniform(0.2, 0.95);
    blk.angle.den = 1 + rng.below(max_den);
    do {
      blk.angle.num = rng.below(blk.angle.den);
    } while (std::gcd(blk.angle.num, blk.angle.den) != 1);
    spec.blocks.push_back(blk);
  }
  for (std::size_t r = 0; r < reals; ++r) spec.real_values.push_back(rng.uniform(-0.95, 0.95));
  spec.conjugator_seed = rng.next_u64();
  return spec;
}

}  // namespace rankcollapse::kernel
