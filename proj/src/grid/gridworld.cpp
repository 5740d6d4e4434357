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

#include "rankcollapse/grid/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include <json.hpp>

namespace rankcollapse::grid {

namespace {

constexpr int kMaxLayoutAttempts = 100;
constexpr int kRowStep[kGridActions] = {0, 0, -1, 1, 0};
constexpr int kColStep[kGridActions] = {-1, 1, 0, 0, 0};

struct Layout {
  std::vector<bool> walls;
  std::vector<int> distance;  // per cell, −1 when unreachable
};

std::size_t cell_index(const GridSpec& spec, Cell c) {
  return static_cast<std::size_t>(c.row * spec.side + c.col);
}

bool in_grid(const GridSpec& spec, int row, int col) {
  return row >= 0 && row < spec.side && col >= 0 && col < spec.side;
}

std::vector<int> distances_to_goal(const GridSpec& spec, const std::vector<bool>& walls) {
  std::vector<int> dist(walls.size(), -1);
  std::deque<Cell> frontier{spec.goal};
  dist[cell_index(spec, spec.goal)] = 0;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    for (std::size_t a = 0; a < 4; ++a) {
      const Cell n{c.row + kRowStep[a], c.col + kColStep[a]};
      if (!in_grid(spec, n.row, n.col)) continue;
      const std::size_t i = cell_index(spec, n);
      if (walls[i] || dist[i] >= 0) continue;
      dist[i] = dist[cell_index(spec, c)] + 1;
      frontier.push_back(n);
    }
  }
  return dist;
}

Layout draw_layout(const GridSpec& spec, linalg::Rng& rng, std::size_t& attempts) {
  const std::size_t cells = static_cast<std::size_t>(spec.side * spec.side);
  for (attempts = 1; attempts <= kMaxLayoutAttempts; ++attempts) {
    Layout layout;
    layout.walls.assign(cells, false);
    for (std::size_t i = 0; i < cells; ++i) layout.walls[i] = rng.bernoulli(spec.wall_prob);
    layout.walls[cell_index(spec, spec.start)] = false;
    layout.walls[cell_index(spec, spec.goal)] = false;
    layout.distance = distances_to_goal(spec, layout.walls);
    if (layout.distance[cell_index(spec, spec.start)] < 0) continue;
    for (std::size_t i = 0; i < cells; ++i)
      if (layout.distance[i] < 0) layout.walls[i] = true;
    return layout;
  }
  std::ostringstream os;
  os << "goal unreachable from start after " << kMaxLayoutAttempts << " wall layouts (seed " << spec.seed
     << ", wall_prob " << spec.wall_prob << ")";
  throw UnreachableGoalError(os.str());
}

Matrix smoothed_features(const GridSpec& spec, linalg::Rng& rng) {
  const std::size_t cells = static_cast<std::size_t>(spec.side * spec.side);
  const Matrix raw = linalg::gaussian_matrix(cells, spec.feature_dim, rng);
  Matrix smooth(cells, spec.feature_dim);
  const int r = spec.smoothing_radius;
  for (int row = 0; row < spec.side; ++row) {
    for (int col = 0; col < spec.side; ++col) {
      const std::size_t i = cell_index(spec, {row, col});
      for (int dr = -r; dr <= r; ++dr) {
        for (int dc = -r; dc <= r; ++dc) {
          if (!in_grid(spec, row + dr, col + dc)) continue;
          const auto src = raw.row(cell_index(spec, {row + dr, col + dc}));
          auto dst = smooth.row(i);
          for (std::size_t f = 0; f < spec.feature_dim; ++f) dst[f] += src[f];
        }
      }
      auto dst = smooth.row(i);
      const double nrm = linalg::norm2(dst);
      // The neighbourhood mean's 1/count factor cancels here.
      for (double& x : dst) x /= nrm;
    }
  }
  return smooth;
}

}  // namespace

void GridSpec::validate() const {
  if (side < 1) throw std::invalid_argument("GridSpec: side must be >= 1");
  if (!(wall_prob >= 0.0 && wall_prob < 1.0)) throw std::invalid_argument("GridSpec: wall_prob must lie in [0, 1)");
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("GridSpec: discount must lie in [0, 1)");
  if (!in_grid(*this, start.row, start.col) || !in_grid(*this, goal.row, goal.col))
    throw std::invalid_argument("GridSpec: start and goal must lie inside the grid");
  if (feature_dim == 0) throw std::invalid_argument("GridSpec: feature_dim must be >= 1");
  if (smoothing_radius < 0) throw std::invalid_argument("GridSpec: smoothing_radius must be >= 0");
}

std::size_t Gridworld::start_state() const {
  return static_cast<std::size_t>(state_of_cell[cell_index(spec, spec.start)]);
}

std::size_t Gridworld::goal_state() const {
  return static_cast<std::size_t>(state_of_cell[cell_index(spec, spec.goal)]);
}

Gridworld build_gridworld(const GridSpec& spec) {
  spec.validate();
  linalg::Rng rng(spec.seed);
  linalg::Rng feature_rng = rng.split();
  std::size_t attempts = 0;
  Layout layout = draw_layout(spec, rng, attempts);

  std::vector<int> state_of_cell(layout.walls.size(), -1);
  std::vector<Cell> cell_of_state;
  std::vector<int> distance;
  for (int row = 0; row < spec.side; ++row) {
    for (int col = 0; col < spec.side; ++col) {
      const std::size_t i = cell_index(spec, {row, col});
      if (layout.walls[i]) continue;
      state_of_cell[i] = static_cast<int>(cell_of_state.size());
      cell_of_state.push_back({row, col});
      distance.push_back(layout.distance[i]);
    }
  }
  const std::size_t n = cell_of_state.size();
  const int max_dist = *std::max_element(distance.begin(), distance.end());

  TabularMdp mdp(n, kGridActions, spec.discount);
  for (std::size_t s = 0; s < n; ++s) {
    const Cell c = cell_of_state[s];
    for (std::size_t a = 0; a < kGridActions; ++a) {
      Cell target{c.row + kRowStep[a], c.col + kColStep[a]};
      if (!in_grid(spec, target.row, target.col) || layout.walls[cell_index(spec, target)]) target = c;
      const auto next = static_cast<std::size_t>(state_of_cell[cell_index(spec, target)]);
      mdp.set_transition(s, a, {{next, 1.0}});
      const double r = max_dist > 0 ? -static_cast<double>(distance[next]) / max_dist : 0.0;
      mdp.set_reward(s, a, r);
    }
  }
  mdp.validate();

  const Matrix cell_features = smoothed_features(spec, feature_rng);
  Matrix features(n, spec.feature_dim);
  for (std::size_t s = 0; s < n; ++s) {
    const auto src = cell_features.row(cell_index(spec, cell_of_state[s]));
    std::copy(src.begin(), src.end(), features.row(s).begin());
  }

  return Gridworld{spec,
                   std::move(mdp),
                   std::move(features),
                   std::move(layout.walls),
                   std::move(state_of_cell),
                   std::move(cell_of_state),
                   std::move(distance),
                   attempts};
}

Coverage measure_coverage(const TabularMdp& mdp, const std::vector<Transition>& records) {
  std::vector<bool> state_seen(mdp.n_states(), false);
  std::vector<bool> pair_seen(mdp.n_pairs(), false);
  for (const auto& t : records) {
    state_seen[t.state] = true;
    pair_seen[mdp.pair(t.state, t.action)] = true;
  }
  Coverage c;
  c.n_states = mdp.n_states();
  c.n_pairs = mdp.n_pairs();
  c.states_visited = static_cast<std::size_t>(std::count(state_seen.begin(), state_seen.end(), true));
  c.pairs_visited = static_cast<std::size_t>(std::count(pair_seen.begin(), pair_seen.end(), true));
  return c;
}

TransitionDataset collect_dataset(const TabularMdp& mdp, const Matrix& features, const BehaviorSpec& behavior,
                                  std::size_t size, std::uint64_t seed) {
  if (behavior.episode_length == 0) throw std::invalid_argument("collect_dataset: episode_length must be >= 1");
  if (features.rows() != mdp.n_states()) throw linalg::DimensionError("collect_dataset: feature rows must equal n_states");
  Policy policy = uniform_policy(mdp);
  if (behavior.kind == BehaviorSpec::Kind::epsilon_greedy)
    policy = epsilon_greedy_policy(mdp, behavior.q, behavior.epsilon);
  linalg::Rng rng(seed);
  TransitionDataset data;
  data.features = features;
  data.records.reserve(size);
  std::size_t s = 0;
  for (std::size_t i = 0; i < size; ++i) {
    if (i % behavior.episode_length == 0) s = mdp.sample_start(rng);
    std::size_t a = mdp.n_actions() - 1;
    double u = rng.uniform();
    for (std::size_t b = 0; b < mdp.n_actions(); ++b) {
      if (u < policy(s, b)) {
        a = b;
        break;
      }
      u -= policy(s, b);
    }
    const std::size_t next = mdp.sample_next(s, a, rng);
    data.records.push_back({s, a, mdp.reward(s, a), next});
    s = next;
  }
  data.coverage = measure_coverage(mdp, data.records);
  return data;
}

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", m.entries()}};
}

Matrix matrix_from_json(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("entries").get<std::vector<double>>());
}

json spec_json(const GridSpec& s) {
  return json{{"side", s.side},
              {"wall_prob", s.wall_prob},
              {"discount", s.discount},
              {"start", {s.start.row, s.start.col}},
              {"goal", {s.goal.row, s.goal.col}},
              {"feature_dim", s.feature_dim},
              {"smoothing_radius", s.smoothing_radius},
              {"seed", s.seed}};
}

GridSpec spec_from_json(const json& j) {
  GridSpec s;
  s.side = j.at("side").get<int>();
  s.wall_prob = j.at("wall_prob").get<double>();
  s.discount = j.at("discount").get<double>();
  s.start = {j.at("start").at(0).get<int>(), j.at("start").at(1).get<int>()};
  s.goal = {j.at("goal").at(0).get<int>(), j.at("goal").at(1).get<int>()};
  s.feature_dim = j.at("feature_dim").get<std::size_t>();
  s.smoothing_radius = j.at("smoothing_radius").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

json mdp_json(const TabularMdp& mdp) {
  json transitions = json::array();
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      json outs = json::array();
      for (const auto& o : mdp.outcomes(s, a)) outs.push_back({o.next, o.prob});
      transitions.push_back(std::move(outs));
    }
  }
  return json{{"n_states", mdp.n_states()},
              {"n_actions", mdp.n_actions()},
              {"discount", mdp.discount()},
              {"reward", mdp.rewards()},
              {"start", mdp.start_distribution()},
              {"transitions", std::move(transitions)}};
}

TabularMdp mdp_from_json(const json& j) {
  TabularMdp mdp(j.at("n_states").get<std::size_t>(), j.at("n_actions").get<std::size_t>(),
                 j.at("discount").get<double>());
  const auto rewards = j.at("reward").get<std::vector<double>>();
  const auto& transitions = j.at("transitions");
  if (rewards.size() != mdp.n_pairs() || transitions.size() != mdp.n_pairs())
    throw std::runtime_error("grid JSON: table sizes do not match n_states * n_actions");
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      std::vector<Outcome> outs;
      for (const auto& o : transitions[mdp.pair(s, a)]) outs.push_back({o.at(0).get<std::size_t>(), o.at(1).get<double>()});
      mdp.set_transition(s, a, std::move(outs));
      mdp.set_reward(s, a, rewards[mdp.pair(s, a)]);
    }
  }
  mdp.set_start_distribution(j.at("start").get<std::vector<double>>());
  mdp.validate();
  return mdp;
}

}  // namespace

std::string to_json(const Gridworld& world, const TransitionDataset* dataset) {
  json doc{{"schema_version", kGridSchemaVersion},
           {"spec", spec_json(world.spec)},
           {"walls", world.walls},
           {"mdp", mdp_json(world.mdp)},
           {"features", matrix_json(world.features)}};
  if (dataset != nullptr) {
    json records = json::array();
    for (const auto& t : dataset->records) records.push_back({t.state, t.action, t.reward, t.next_state});
    doc["dataset"] = json{{"records", std::move(records)}, {"features", matrix_json(dataset->features)}};
  }
  return doc.dump();
}

GridSnapshot grid_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("schema_version").get<int>();
    if (version != kGridSchemaVersion) {
      std::ostringstream os;
      os << "grid JSON: schema version " << version << " does not match expected " << kGridSchemaVersion;
      throw std::runtime_error(os.str());
    }
    GridSnapshot snap{spec_from_json(doc.at("spec")), mdp_from_json(doc.at("mdp")),
                      matrix_from_json(doc.at("features")), doc.at("walls").get<std::vector<bool>>(), std::nullopt};
    if (doc.contains("dataset")) {
      TransitionDataset data;
      for (const auto& r : doc["dataset"].at("records")) {
        Transition t{r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>(), r.at(2).get<double>(),
                     r.at(3).get<std::size_t>()};
        if (t.state >= snap.mdp.n_states() || t.next_state >= snap.mdp.n_states() || t.action >= snap.mdp.n_actions())
          throw std::runtime_error("grid JSON: dataset record out of range");
        data.records.push_back(t);
      }
      data.features = matrix_from_json(doc["dataset"].at("features"));
      data.coverage = measure_coverage(snap.mdp, data.records);
      snap.dataset = std::move(data);
    }
    return snap;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("grid JSON: ") + e.what());
  }
}

}  // namespace rankcollapse::grid
