// core/optimizer.cc

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

#include "core/optimizer.h"

#include <cmath>

namespace svbn {

OptimizerKind ParseOptimizerKind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  Throw(Status::kConfig, "unknown optimizer: " + name);
}

void TrainConfig::Validate() const {
  if (batch_size < 1) Throw(Status::kConfig, "train: batch_size must be positive");
  if (learning_rate <= 0.0) Throw(Status::kConfig, "train: learning_rate must be positive");
  if (epochs < 1) Throw(Status::kConfig, "train: epochs must be positive");
  if (l2_penalty < 0.0) Throw(Status::kConfig, "train: l2_penalty must be >= 0");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate)
    : kind_(kind), lr_(learning_rate) {}

void Optimizer::Step(const std::vector<ParamRef>& params,
                     const std::vector<ParamRef>& grads) {
  if (params.size() != grads.size())
    Throw(Status::kInternal, "optimizer: parameter/gradient block count mismatch");

  for (size_t b = 0; b < params.size(); ++b) {
    if (params[b].size != grads[b].size)
      Throw(Status::kInternal, "optimizer: size mismatch in block " + params[b].name);
    for (Eigen::Index i = 0; i < grads[b].size; ++i) {
      if (!std::isfinite(grads[b].data[i]))
        Throw(Status::kNumeric, "non-finite gradient in " + params[b].name + " at index " +
                                    std::to_string(i));
    }
  }

  ++step_;
  if (kind_ == OptimizerKind::kSgd) {
    for (size_t b = 0; b < params.size(); ++b)
      for (Eigen::Index i = 0; i < params[b].size; ++i)
        params[b].data[i] -= lr_ * grads[b].data[i];
    return;
  }

  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Vector::Zero(p.size));
      v_.push_back(Vector::Zero(p.size));
    }
  }
  if (m_.size() != params.size())
    Throw(Status::kInternal, "optimizer: state does not match parameter blocks");
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (size_t b = 0; b < params.size(); ++b) {
    for (Eigen::Index i = 0; i < params[b].size; ++i) {
      const double g = grads[b].data[i];
      m_[b](i) = beta1 * m_[b](i) + (1.0 - beta1) * g;
      v_[b](i) = beta2 * v_[b](i) + (1.0 - beta2) * g * g;
      const double m_hat = m_[b](i) / bc1;
      const double v_hat = v_[b](i) / bc2;
      params[b].data[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

}  // namespace svbn
