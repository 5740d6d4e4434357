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

#include "rankcollapse/linalg/matrix.hpp"

namespace rankcollapse::linalg {

// SplitMix64 generator. Every stochastic routine in the project draws from one
// of these, so a seed fully determines an experiment.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  // Independent child stream; the parent advances by one draw.
  Rng split();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0);
// Haar-distributed orthogonal matrix (QR of a Gaussian with sign correction).
Matrix random_orthogonal(std::size_t n, Rng& rng);
// rows×cols with orthonormal columns, cols <= rows.
Matrix random_column_orthonormal(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace rankcollapse::linalg
