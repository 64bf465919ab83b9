// core/activations.h

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

#ifndef SVBN_CORE_ACTIVATIONS_H_
#define SVBN_CORE_ACTIVATIONS_H_

#include <string>

#include "core/common.h"

namespace svbn {

enum class Activation : uint8_t { kLinear = 0, kSigmoid = 1, kRelu = 2, kGelu = 3 };

Activation ParseActivation(const std::string& name);
std::string ActivationName(Activation activation);

struct ActivationValue {
  double value;
  double derivative;
};

// Stable for large |v|: sigmoid never overflows; GELU uses the exact
// erf-based Gaussian CDF, derivative Phi(v) + v*phi(v). The ReLU derivative
// at exactly 0 is defined as 0.
ActivationValue ApplyActivation(Activation activation, double v);

// Elementwise over a matrix; derivative filled if non-null.
void ApplyActivation(Activation activation, const Matrix& in, Matrix* value,
                     Matrix* derivative);

}  // namespace svbn

#endif  // SVBN_CORE_ACTIVATIONS_H_
