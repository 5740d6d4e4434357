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

#include "rankcollapse/nfqi/mlp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rankcollapse::nfqi {

namespace {

void add_bias(Matrix& z, const Vector& b) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b[j];
  }
}

Vector column_sums(const Matrix& m) {
  Vector out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
  }
  return out;
}

}  // namespace

MlpGradient& MlpGradient::operator+=(const MlpGradient& other) {
  if (other.layers.size() != layers.size()) throw linalg::DimensionError("MlpGradient: layer count differs");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].weight += other.layers[l].weight;
    for (std::size_t j = 0; j < layers[l].bias.size(); ++j) layers[l].bias[j] += other.layers[l].bias[j];
  }
  return *this;
}

double MlpGradient::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers) {
    for (double x : l.weight.entries()) s += x * x;
    for (double x : l.bias) s += x * x;
  }
  return s;
}

MlpQNetwork::MlpQNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.size() < 2) throw std::invalid_argument("MlpQNetwork: needs at least one hidden layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].weight.rows())
      throw linalg::DimensionError("MlpQNetwork: bias length must equal layer width");
    if (l > 0 && layers_[l].weight.cols() != layers_[l - 1].weight.rows())
      throw linalg::DimensionError("MlpQNetwork: consecutive layer shapes do not compose");
  }
}

MlpQNetwork MlpQNetwork::he_init(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t n_actions,
                                 linalg::Rng& rng) {
  if (hidden.empty()) throw std::invalid_argument("he_init: needs at least one hidden layer");
  std::vector<DenseLayer> layers;
  std::size_t fan_in = input_dim;
  auto add = [&](std::size_t width) {
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    layers.push_back({linalg::gaussian_matrix(width, fan_in, rng, scale), Vector(width, 0.0)});
    fan_in = width;
  };
  for (std::size_t w : hidden) add(w);
  add(n_actions);
  return MlpQNetwork(std::move(layers));
}

std::size_t MlpQNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

ForwardCache MlpQNetwork::forward(const Matrix& inputs) const {
  if (inputs.cols() != input_dim()) throw linalg::DimensionError("MlpQNetwork::forward: input width mismatch");
  ForwardCache cache;
  cache.input = inputs;
  const Matrix* h = &cache.input;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    // x·Wᵀ through an explicit transpose keeps the inner loop an axpy,
    // which vectorizes; the dot-product form does not.
    Matrix z = *h * layers_[l].weight.transpose();
    add_bias(z, layers_[l].bias);
    Matrix a = z;
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = std::max(0.0, a.data()[i]);
    cache.pre.push_back(std::move(z));
    cache.post.push_back(std::move(a));
    h = &cache.post.back();
  }
  cache.q = *h * layers_.back().weight.transpose();
  add_bias(cache.q, layers_.back().bias);
  return cache;
}

MlpGradient MlpQNetwork::backward(const ForwardCache& cache, const Matrix& d_q, const Matrix& d_features) const {
  if (d_q.rows() != cache.q.rows() || d_q.cols() != cache.q.cols())
    throw linalg::DimensionError("MlpQNetwork::backward: dL/dQ shape mismatch");
  MlpGradient grad;
  grad.layers.resize(layers_.size());
  const std::size_t last = layers_.size() - 1;
  grad.layers[last] = {linalg::transpose_times(d_q, cache.post.back()), column_sums(d_q)};
  Matrix d_post = d_q * layers_[last].weight;
  if (!d_features.empty()) {
    if (d_features.rows() != d_post.rows() || d_features.cols() != d_post.cols())
      throw linalg::DimensionError("MlpQNetwork::backward: dL/dPhi shape mismatch");
    d_post += d_features;
  }
  for (std::size_t l = last; l-- > 0;) {
    Matrix d_pre = std::move(d_post);
    const Matrix& pre = cache.pre[l];
    for (std::size_t i = 0; i < d_pre.size(); ++i)
      if (!(pre.data()[i] > 0.0)) d_pre.data()[i] = 0.0;
    const Matrix& below = l == 0 ? cache.input : cache.post[l - 1];
    grad.layers[l] = {linalg::transpose_times(d_pre, below), column_sums(d_pre)};
    if (l > 0) d_post = d_pre * layers_[l].weight;
  }
  return grad;
}

MlpGradient MlpQNetwork::zero_gradient() const {
  MlpGradient g;
  for (const auto& l : layers_) g.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()), Vector(l.bias.size())});
  return g;
}

bool MlpQNetwork::all_finite() const {
  for (const auto& l : layers_)
    if (!linalg::all_finite(l.weight) || !linalg::all_finite(l.bias)) return false;
  return true;
}

std::vector<double*> MlpQNetwork::parameters() {
  std::vector<double*> out;
  out.reserve(parameter_count());
  for (auto& l : layers_) {
    for (std::size_t i = 0; i < l.weight.size(); ++i) out.push_back(l.weight.data() + i);
    for (double& b : l.bias) out.push_back(&b);
  }
  return out;
}

std::vector<const double*> MlpQNetwork::parameters() const {
  std::vector<const double*> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (std::size_t i = 0; i < l.weight.size(); ++i) out.push_back(l.weight.data() + i);
    for (const double& b : l.bias) out.push_back(&b);
  }
  return out;
}

bool MlpQNetwork::operator==(const MlpQNetwork& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    if (layers_[l].weight != other.layers_[l].weight || layers_[l].bias != other.layers_[l].bias) return false;
  return true;
}

std::vector<double*> gradient_entries(MlpGradient& grad) {
  std::vector<double*> out;
  for (auto& l : grad.layers) {
    for (std::size_t i = 0; i < l.weight.size(); ++i) out.push_back(l.weight.data() + i);
    for (double& b : l.bias) out.push_back(&b);
  }
  return out;
}

AdamOptimizer::AdamOptimizer(const MlpQNetwork& net, AdamConfig cfg)
    : cfg_(cfg), m_(net.parameter_count(), 0.0), v_(net.parameter_count(), 0.0) {
  if (!(cfg_.learning_rate > 0.0)) throw std::invalid_argument("AdamOptimizer: learning rate must be positive");
}

void AdamOptimizer::step(MlpQNetwork& net, MlpGradient& grad) {
  auto params = net.parameters();
  auto grads = gradient_entries(grad);
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw linalg::DimensionError("AdamOptimizer::step: parameter count changed");
  ++t_;
  const double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = *grads[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    *params[i] -= cfg_.learning_rate * (m_[i] / bias1) / (std::sqrt(v_[i] / bias2) + cfg_.epsilon);
  }
}

using nlohmann::json;

std::string to_json(const MlpQNetwork& net) {
  json layers = json::array();
  for (const auto& l : net.layers())
    layers.push_back({{"rows", l.weight.rows()}, {"cols", l.weight.cols()}, {"weight", l.weight.entries()},
                      {"bias", l.bias}});
  return json{{"schema_version", kCheckpointSchemaVersion}, {"kind", "mlp_q_network"}, {"layers", std::move(layers)}}
      .dump();
}

MlpQNetwork network_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("schema_version").get<int>();
    if (version != kCheckpointSchemaVersion) {
      std::ostringstream os;
      os << "checkpoint: schema version " << version << " does not match expected " << kCheckpointSchemaVersion;
      throw std::runtime_error(os.str());
    }
    std::vector<DenseLayer> layers;
    for (const auto& l : doc.at("layers"))
      layers.push_back({Matrix(l.at("rows").get<std::size_t>(), l.at("cols").get<std::size_t>(),
                               l.at("weight").get<std::vector<double>>()),
                        l.at("bias").get<Vector>()});
    return MlpQNetwork(std::move(layers));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace rankcollapse::nfqi
