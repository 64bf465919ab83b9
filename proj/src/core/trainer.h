// core/trainer.h

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

#ifndef SVBN_CORE_TRAINER_H_
#define SVBN_CORE_TRAINER_H_

#include <string>
#include <vector>

#include "core/model_io.h"
#include "core/optimizer.h"

namespace svbn {

struct TrainTrace {
  std::vector<double> epoch_losses;
  int warnings = 0;
};

struct DenseTrainOptions {
  std::vector<int> hidden_widths;
  Activation activation = Activation::kGelu;
  LossKind loss = LossKind::kCe;
  LossHyper hyper;
  int n_classes = 0;
  int embedding_dim = 128;
  TrainConfig train;
  // Batch structure for the metric losses (triplet, ntxent).
  int classes_per_batch = 8;
  int samples_per_class = 4;
};

// Mini-batch training of the feed-forward extractor. `inputs` are spliced
// frame vectors, one per row. Batches are seeded shuffles; triplet and
// ntxent losses draw class-structured batches instead.
NetworkModel TrainDenseModel(const Matrix& inputs, const std::vector<int>& labels,
                             const DenseTrainOptions& options, TrainTrace* trace = nullptr);

struct ApcTrainOptions {
  int gru_layers = 3;
  int gru_hidden = 64;
  int shift = 5;  // t_n
  TrainConfig train;
};

// Utterance-level GRU training with the l1 objective on t_n-step-ahead
// frames. Gradients accumulate over train.batch_size utterances per step;
// utterances with T <= t_n are skipped and counted as warnings.
NetworkModel TrainApcModel(const std::vector<Matrix>& utterances,
                           const ApcTrainOptions& options, TrainTrace* trace = nullptr);

// Pre-activation taps of the listed layers (1-based), concatenated in order.
// Dense models expect spliced inputs; GRU models take raw frames and return
// hidden-state sequences.
Matrix TapModel(const NetworkModel& model, const std::vector<int>& layers,
                const Matrix& inputs);

struct GradCheckCase {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Finite-difference verification of every loss-kind x activation combination
// on small random instances, plus the GRU BPTT path. Kink configurations
// (ReLU at zero, hinge boundaries, l1 ties) are detected and redrawn.
std::vector<GradCheckCase> RunGradCheckSuite(uint64_t seed, double epsilon,
                                             double tolerance);

}  // namespace svbn

#endif  // SVBN_CORE_TRAINER_H_
