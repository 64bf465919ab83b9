// core/gru.h

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

#ifndef SVBN_CORE_GRU_H_
#define SVBN_CORE_GRU_H_

#include <vector>

#include "core/common.h"
#include "core/dense_net.h"

namespace svbn {

// One GRU layer. Gates:
//   z_t = sigmoid(Wz x_t + Uz h_{t-1} + bz)
//   r_t = sigmoid(Wr x_t + Ur h_{t-1} + br)
//   c_t = tanh(Wh x_t + Uh (r_t .* h_{t-1}) + bh)
//   h_t = (1 - z_t) .* h_{t-1} + z_t .* c_t
struct GruLayer {
  Matrix wz, wr, wh;  // hidden x in
  Matrix uz, ur, uh;  // hidden x hidden
  Vector bz, br, bh;
};

struct GruLayerGradients {
  Matrix wz, wr, wh, uz, ur, uh;
  Vector bz, br, bh;
};

struct GruGradients {
  std::vector<GruLayerGradients> layers;
  Matrix proj_w;
  Vector proj_b;
};

// Per-utterance forward state for backpropagation through time.
struct GruCache {
  Matrix input;                      // T x in
  std::vector<Matrix> z, r, c, h;    // per layer, each T x hidden
  Matrix output;                     // T x out (after projection)
};

// Stacked GRU encoder with a linear projection back to the frame dimension.
// Hidden state starts at zero for every utterance.
class GruEncoder {
 public:
  GruEncoder() = default;
  GruEncoder(int input_dim, int hidden_dim, int num_layers, int output_dim);

  void Initialize(Rng* rng);

  // Runs the full sequence (rows are time steps); fills cache when non-null.
  Matrix Forward(const Matrix& sequence, GruCache* cache) const;

  // output_grad is dLoss/d(projection output), same shape as cache.output.
  GruGradients Backward(const GruCache& cache, const Matrix& output_grad) const;

  // Hidden-state sequence (post-recurrence) of layer `layer_index`, 1-based.
  Matrix TapHidden(int layer_index, const Matrix& sequence) const;

  GruGradients ZeroGradients() const;
  std::vector<ParamRef> Params();
  static std::vector<ParamRef> GradRefs(GruGradients* grads);
  Eigen::Index NumParams() const;

  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }
  int output_dim() const { return output_dim_; }
  int NumLayers() const { return static_cast<int>(layers_.size()); }
  std::vector<GruLayer>& mutable_layers() { return layers_; }
  const std::vector<GruLayer>& layers() const { return layers_; }
  Matrix& mutable_proj_w() { return proj_w_; }
  Vector& mutable_proj_b() { return proj_b_; }
  const Matrix& proj_w() const { return proj_w_; }
  const Vector& proj_b() const { return proj_b_; }

 private:
  int input_dim_ = 0;
  int hidden_dim_ = 0;
  int output_dim_ = 0;
  std::vector<GruLayer> layers_;
  Matrix proj_w_;  // out x hidden
  Vector proj_b_;
};

}  // namespace svbn

#endif  // SVBN_CORE_GRU_H_
