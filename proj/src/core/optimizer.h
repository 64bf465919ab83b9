// core/optimizer.h

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

#ifndef SVBN_CORE_OPTIMIZER_H_
#define SVBN_CORE_OPTIMIZER_H_

#include <string>
#include <vector>

#include "core/common.h"
#include "core/dense_net.h"

namespace svbn {

enum class OptimizerKind : uint8_t { kSgd = 0, kAdam = 1 };

OptimizerKind ParseOptimizerKind(const std::string& name);

struct TrainConfig {
  int batch_size = 1024;
  double learning_rate = 0.001;
  int epochs = 30;
  double l2_penalty = 0.0001;
  uint64_t seed = 42;
  OptimizerKind optimizer = OptimizerKind::kAdam;

  void Validate() const;
};

// SGD: p <- p - lr * g.
// Adam: bias-corrected first/second moments, beta1=0.9, beta2=0.999, eps=1e-8.
// A non-finite gradient aborts with the parameter block and index named.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate);

  void Step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads);

  int64_t steps_taken() const { return step_; }

 private:
  OptimizerKind kind_;
  double lr_;
  int64_t step_ = 0;
  std::vector<Vector> m_, v_;
};

}  // namespace svbn

#endif  // SVBN_CORE_OPTIMIZER_H_
