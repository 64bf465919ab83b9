// core/dense_net.cc

// Copyright 2026  The svbn Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/dense_net.h"

#include <cmath>

namespace svbn {

DenseNetwork::DenseNetwork(int input_dim, const std::vector<int>& widths,
                           Activation activation)
    : input_dim_(input_dim) {
  if (input_dim < 1) Throw(Status::kConfig, "DenseNetwork: input_dim must be positive");
  if (widths.empty()) Throw(Status::kConfig, "DenseNetwork: need at least one layer");
  int in = input_dim;
  for (size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] < 1) Throw(Status::kConfig, "DenseNetwork: layer width must be positive");
    DenseLayer layer;
    layer.weights = Matrix::Zero(widths[i], in);
    layer.bias = Vector::Zero(widths[i]);
    layer.activation = (i + 1 == widths.size()) ? Activation::kLinear : activation;
    layers_.push_back(std::move(layer));
    in = widths[i];
  }
}

void DenseNetwork::Initialize(Rng* rng) {
  for (auto& layer : layers_) {
    const double fan_in = static_cast<double>(layer.weights.cols());
    const double fan_out = static_cast<double>(layer.weights.rows());
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
        layer.weights(i, j) = rng->Uniform(-bound, bound);
    layer.bias.setZero();
  }
}

Matrix DenseNetwork::Forward(const Matrix& batch, ForwardCache* cache) const {
  if (batch.cols() != input_dim_)
    Throw(Status::kArg, "DenseNetwork::Forward: input width " +
                            std::to_string(batch.cols()) + " != input_dim " +
                            std::to_string(input_dim_));
  if (cache) {
    cache->input = batch;
    cache->pre.clear();
    cache->act.clear();
    cache->deriv.clear();
  }
  Matrix h = batch;
  for (const auto& layer : layers_) {
    Matrix pre = h * layer.weights.transpose();
    pre.rowwise() += layer.bias.transpose();
    Matrix value, deriv;
    ApplyActivation(layer.activation, pre, &value, &deriv);
    if (cache) {
      cache->pre.push_back(pre);
      cache->act.push_back(value);
      cache->deriv.push_back(deriv);
    }
    h = std::move(value);
  }
  return h;
}

DenseGradients DenseNetwork::Backward(const ForwardCache& cache, const Matrix& output_grad,
                                      double l2_penalty) const {
  if (cache.pre.size() != layers_.size())
    Throw(Status::kArg, "DenseNetwork::Backward: cache does not match network");
  DenseGradients grads = ZeroGradients();
  Matrix da = output_grad;  // dLoss/d(activation of current layer)
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    Matrix dz = da.cwiseProduct(cache.deriv[l]);
    const Matrix& below = (l == 0) ? cache.input : cache.act[l - 1];
    grads.weights[l] = dz.transpose() * below;
    if (l2_penalty != 0.0) grads.weights[l] += l2_penalty * layers_[l].weights;
    grads.bias[l] = dz.colwise().sum().transpose();
    if (l > 0) da = dz * layers_[l].weights;
  }
  return grads;
}

Matrix DenseNetwork::TapHidden(int layer_index, const Matrix& batch) const {
  if (layer_index < 1 || layer_index > static_cast<int>(layers_.size()))
    Throw(Status::kArg, "tap_hidden: layer index " + std::to_string(layer_index) +
                            " out of range 1.." + std::to_string(layers_.size()));
  Matrix h = batch;
  for (int l = 0; l < layer_index; ++l) {
    Matrix pre = h * layers_[l].weights.transpose();
    pre.rowwise() += layers_[l].bias.transpose();
    if (l + 1 == layer_index) return pre;
    Matrix value;
    ApplyActivation(layers_[l].activation, pre, &value, nullptr);
    h = std::move(value);
  }
  return h;  // unreachable
}

DenseGradients DenseNetwork::ZeroGradients() const {
  DenseGradients grads;
  for (const auto& layer : layers_) {
    grads.weights.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
    grads.bias.push_back(Vector::Zero(layer.bias.size()));
  }
  return grads;
}

std::vector<ParamRef> DenseNetwork::Params() {
  std::vector<ParamRef> refs;
  for (size_t l = 0; l < layers_.size(); ++l) {
    refs.push_back({layers_[l].weights.data(), layers_[l].weights.size(),
                    "layer" + std::to_string(l + 1) + ".W"});
    refs.push_back({layers_[l].bias.data(), layers_[l].bias.size(),
                    "layer" + std::to_string(l + 1) + ".b"});
  }
  return refs;
}

std::vector<ParamRef> DenseNetwork::GradRefs(DenseGradients* grads) {
  std::vector<ParamRef> refs;
  for (size_t l = 0; l < grads->weights.size(); ++l) {
    refs.push_back({grads->weights[l].data(), grads->weights[l].size(),
                    "layer" + std::to_string(l + 1) + ".W"});
    refs.push_back({grads->bias[l].data(), grads->bias[l].size(),
                    "layer" + std::to_string(l + 1) + ".b"});
  }
  return refs;
}

Eigen::Index DenseNetwork::NumParams() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

}  // namespace svbn
