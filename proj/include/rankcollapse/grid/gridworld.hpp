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
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankcollapse/grid/mdp.hpp"

namespace rankcollapse::grid {

enum class Move : std::size_t { left = 0, right = 1, up = 2, down = 3, stay = 4 };
inline constexpr std::size_t kGridActions = 5;

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

struct GridSpec {
  int side = 16;
  double wall_prob = 0.2;
  double discount = 0.95;
  Cell start{0, 0};
  Cell goal{15, 15};
  std::size_t feature_dim = 64;
  int smoothing_radius = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

class UnreachableGoalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// States are the free cells connected to the goal, in row-major order. Free
// cells cut off from the goal become walls.
struct Gridworld {
  GridSpec spec;
  TabularMdp mdp;
  Matrix features;                 // n_states × feature_dim, unit rows
  std::vector<bool> walls;         // side², row-major
  std::vector<int> state_of_cell;  // −1 for walls
  std::vector<Cell> cell_of_state;
  std::vector<int> distance;       // per state, shortest path to goal
  std::size_t attempts = 1;        // wall layouts drawn

  std::size_t start_state() const;
  std::size_t goal_state() const;
};

// Walls are drawn with wall_prob; start and goal are kept free. Rewards are
// −distance(next)/max distance. Feature rows start as standard normals per
// cell, are averaged over the (2r+1)² in-grid neighbourhood, then scaled to
// unit norm. Throws UnreachableGoalError after 100 failed layouts.
Gridworld build_gridworld(const GridSpec& spec);

struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
};

struct Coverage {
  std::size_t states_visited = 0;
  std::size_t pairs_visited = 0;
  std::size_t n_states = 0;
  std::size_t n_pairs = 0;
};

struct TransitionDataset {
  std::vector<Transition> records;
  Matrix features;  // per-state feature table
  Coverage coverage;
};

Coverage measure_coverage(const TabularMdp& mdp, const std::vector<Transition>& records);

struct BehaviorSpec {
  enum class Kind { uniform, epsilon_greedy };
  Kind kind = Kind::uniform;
  std::vector<double> q;  // required for epsilon_greedy
  double epsilon = 0.1;
  std::size_t episode_length = 50;
};

// Episodes of episode_length steps from the start distribution.
TransitionDataset collect_dataset(const TabularMdp& mdp, const Matrix& features, const BehaviorSpec& behavior,
                                  std::size_t size, std::uint64_t seed);

inline constexpr int kGridSchemaVersion = 1;

// Versioned JSON with the spec, the walls, the MDP tables and, when given,
// the dataset.
std::string to_json(const Gridworld& world, const TransitionDataset* dataset = nullptr);

struct GridSnapshot {
  GridSpec spec;
  TabularMdp mdp;
  Matrix features;
  std::vector<bool> walls;
  std::optional<TransitionDataset> dataset;
};

// Throws std::runtime_error on schema mismatch or malformed input.
GridSnapshot grid_from_json(const std::string& text);

}  // namespace rankcollapse::grid
