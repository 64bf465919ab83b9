// core/dense_net.h

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

#ifndef SVBN_CORE_DENSE_NET_H_
#define SVBN_CORE_DENSE_NET_H_

#include <string>
#include <vector>

#include "core/activations.h"
#include "core/common.h"

namespace svbn {

// Named view into a parameter block; shared by the optimizer and the
// finite-difference checker.
struct ParamRef {
  double* data;
  Eigen::Index size;
  std::string name;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::kLinear;
};

struct DenseGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> bias;
};

// All intermediate state of one forward pass. Batches are row-per-sample.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;    // pre-activation per layer
  std::vector<Matrix> act;    // activation output per layer
  std::vector<Matrix> deriv;  // activation derivative at pre
};

class DenseNetwork {
 public:
  DenseNetwork() = default;
  // widths[i] is the output width of layer i; hidden layers use `activation`,
  // the final layer is linear.
  DenseNetwork(int input_dim, const std::vector<int>& widths, Activation activation);

  void Initialize(Rng* rng);  // uniform +-sqrt(6/(fan_in+fan_out))

  // Returns the final layer output; fills cache when non-null.
  Matrix Forward(const Matrix& batch, ForwardCache* cache) const;

  // output_grad is dLoss/d(final activation). Weight gradients include the
  // L2 term l2_penalty * W; biases carry no L2.
  DenseGradients Backward(const ForwardCache& cache, const Matrix& output_grad,
                          double l2_penalty) const;

  // Pre-activation output of layer `layer_index` (1-based) on the batch.
  Matrix TapHidden(int layer_index, const Matrix& batch) const;

  DenseGradients ZeroGradients() const;
  std::vector<ParamRef> Params();
  static std::vector<ParamRef> GradRefs(DenseGradients* grads);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return layers_.empty() ? input_dim_ : static_cast<int>(layers_.back().weights.rows()); }
  int NumLayers() const { return static_cast<int>(layers_.size()); }
  Eigen::Index NumParams() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

 private:
  int input_dim_ = 0;
  std::vector<DenseLayer> layers_;
};

}  // namespace svbn

#endif  // SVBN_CORE_DENSE_NET_H_
