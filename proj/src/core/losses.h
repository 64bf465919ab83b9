// core/losses.h

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

#ifndef SVBN_CORE_LOSSES_H_
#define SVBN_CORE_LOSSES_H_

#include <string>
#include <vector>

#include "core/common.h"
#include "core/dense_net.h"

namespace svbn {

enum class LossKind : uint8_t {
  kCe = 0,
  kFocal = 1,
  kJointCenter = 2,
  kMsoftmax = 3,
  kArcface = 4,
  kOsl = 5,
  kTripletCos = 6,
  kTripletEuc = 7,
  kNtxent = 8,
  kL1Apc = 9,
};

LossKind ParseLossKind(const std::string& name);
std::string LossKindName(LossKind kind);
// True when the network output is a d-dimensional embedding consumed by a
// loss head, false when the network emits class logits (ce, focal) or
// regression outputs (l1_apc).
bool LossUsesEmbedding(LossKind kind);

struct LossHyper {
  double lambda = 0.003;      // joint-center balance
  double gamma = 2.0;         // focal modulation
  double scale_s = 64.0;      // arcface scale
  double margin_m = 0.5;      // arcface additive angular margin (radians)
  double tau = 0.5;           // ntxent temperature
  double triplet_margin = 0.2;
  double center_alpha = 0.5;  // per-batch center update factor

  void Validate(LossKind kind) const;
};

// Mean cross-entropy with log-sum-exp; gradient is (softmax - onehot)/B.
double LossCe(const Matrix& logits, const std::vector<int>& labels, Matrix* grad_logits);

// Mean of -(1-p_t)^gamma * log(p_t); gamma = 0 is exactly LossCe.
double LossFocal(const Matrix& logits, const std::vector<int>& labels, double gamma,
                 Matrix* grad_logits);

// CE over given logits plus (lambda/2) * mean ||z_i - c_{y_i}||^2. The
// embedding gradient covers the center term only; the CE part reaches the
// embeddings through grad_logits and the head's linear layer.
double LossJointCenter(const Matrix& embeddings, const Matrix& logits,
                       const std::vector<int>& labels, const Matrix& centers, double lambda,
                       Matrix* grad_embeddings, Matrix* grad_logits, Matrix* grad_centers);

// Per-batch center update: each class center moves toward the batch mean of
// its class by factor alpha. Classes absent from the batch are unchanged.
void UpdateCenters(const Matrix& embeddings, const std::vector<int>& labels, double alpha,
                   Matrix* centers);

// Logits ||z|| cos(theta_j) = (W_j/||W_j||)' z; CE on top.
double LossMsoftmax(const Matrix& embeddings, const std::vector<int>& labels,
                    const Matrix& weight, Matrix* grad_embeddings, Matrix* grad_weight);

// Embeddings and weight columns normalized; target logit s*cos(theta+m) with
// theta clamped so theta + m <= pi - 1e-6, non-target s*cos(theta).
double LossArcface(const Matrix& embeddings, const std::vector<int>& labels,
                   const Matrix& weight, double s, double m, Matrix* grad_embeddings,
                   Matrix* grad_weight);

// Contiguous block-diagonal 0/1 mask, one block of floor(d/n) rows per class,
// remainder rows to the last class. floor(d/n) == 0 is a configuration error.
Matrix MakeOslMask(int embed_dim, int n_classes);

double LossOsl(const Matrix& embeddings, const std::vector<int>& labels, const Matrix& weight,
               const Matrix& mask, Matrix* grad_embeddings, Matrix* grad_weight);

enum class TripletMetric : uint8_t { kCosine = 0, kEuclidean = 1 };

// Batch-hard: per anchor, hardest positive minus hardest negative plus
// margin, hinged at zero, averaged over anchors that have both a positive and
// a negative. Returns the number of anchors lacking one in *warnings.
double LossTriplet(const Matrix& embeddings, const std::vector<int>& labels,
                   TripletMetric metric, double margin, Matrix* grad_embeddings,
                   int* warnings);

// positive[i] is the row index of sample i's designated positive, or -1 to
// exclude sample i (counted in *warnings). Mean over all included ordered
// pairs; cosine similarity scaled by 1/tau.
double LossNtxent(const Matrix& embeddings, const std::vector<int>& positive, double tau,
                  Matrix* grad_embeddings, int* warnings);

// Sum of absolute errors over all positions; subgradient sign(o - t), 0 at
// exact ties.
double LossL1Apc(const Matrix& predictions, const Matrix& targets, Matrix* grad_predictions);

// Trainable parameters attached to a loss (class weight matrix, bias,
// centers) plus the hyperparameters, bundled for training, gradient checking
// and serialization.
class LossHead {
 public:
  LossHead() = default;
  static LossHead Create(LossKind kind, int n_classes, int embed_dim,
                         const LossHyper& hyper, Rng* rng);

  struct Result {
    double value = 0.0;
    Matrix grad_output;  // d(loss)/d(network output)
    int warnings = 0;
  };

  // `output` is the network output batch: logits for ce/focal, embeddings for
  // the margin/metric losses, predictions for l1. `labels` drives
  // classification losses; `targets` the l1 loss; `positive` the ntxent
  // pairing. Parameter gradients are stored on the head (see GradRefs).
  Result Evaluate(const Matrix& output, const std::vector<int>& labels,
                  const Matrix* targets = nullptr, const std::vector<int>* positive = nullptr);

  // Center update rule, applied after each optimizer step.
  void PostStep(const Matrix& output, const std::vector<int>& labels);

  std::vector<ParamRef> Params();
  std::vector<ParamRef> GradRefs();
  bool HasParams() const { return weight_.size() > 0 || centers_.size() > 0; }

  LossKind kind() const { return kind_; }
  int n_classes() const { return n_classes_; }
  int embed_dim() const { return embed_dim_; }
  const LossHyper& hyper() const { return hyper_; }
  const Matrix& weight() const { return weight_; }
  const Vector& bias() const { return bias_; }
  const Matrix& centers() const { return centers_; }
  Matrix& mutable_weight() { return weight_; }
  Vector& mutable_bias() { return bias_; }
  Matrix& mutable_centers() { return centers_; }
  const Matrix& osl_mask() const { return osl_mask_; }
  void RebuildOslMask();

 private:
  LossKind kind_ = LossKind::kCe;
  int n_classes_ = 0;
  int embed_dim_ = 0;
  LossHyper hyper_;
  Matrix weight_;   // d x n
  Vector bias_;     // n (joint_center softmax bias)
  Matrix centers_;  // n x d
  Matrix osl_mask_;
  Matrix grad_weight_;
  Vector grad_bias_;
  Matrix grad_centers_;
};

}  // namespace svbn

#endif  // SVBN_CORE_LOSSES_H_
