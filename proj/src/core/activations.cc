// core/activations.cc

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

#include "core/activations.h"

#include <cmath>

namespace svbn {

Activation ParseActivation(const std::string& name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "relu") return Activation::kRelu;
  if (name == "gelu") return Activation::kGelu;
  Throw(Status::kConfig, "unknown activation: " + name);
}

std::string ActivationName(Activation activation) {
  switch (activation) {
    case Activation::kLinear: return "linear";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kRelu: return "relu";
    case Activation::kGelu: return "gelu";
  }
  return "unknown";
}

namespace {
const double kInvSqrt2 = 0.70710678118654752440;
const double kInvSqrt2Pi = 0.39894228040143267794;

ActivationValue Sigmoid(double v) {
  double f;
  if (v >= 0.0) {
    f = 1.0 / (1.0 + std::exp(-v));
  } else {
    const double e = std::exp(v);
    f = e / (1.0 + e);
  }
  return {f, f * (1.0 - f)};
}

ActivationValue Gelu(double v) {
  const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
  return {v * cdf, cdf + v * pdf};
}
}  // namespace

ActivationValue ApplyActivation(Activation activation, double v) {
  switch (activation) {
    case Activation::kLinear: return {v, 1.0};
    case Activation::kSigmoid: return Sigmoid(v);
    case Activation::kRelu: return v > 0.0 ? ActivationValue{v, 1.0} : ActivationValue{0.0, 0.0};
    case Activation::kGelu: return Gelu(v);
  }
  Throw(Status::kInternal, "bad activation tag");
}

void ApplyActivation(Activation activation, const Matrix& in, Matrix* value,
                     Matrix* derivative) {
  value->resize(in.rows(), in.cols());
  if (derivative) derivative->resize(in.rows(), in.cols());
  for (Eigen::Index j = 0; j < in.cols(); ++j) {
    for (Eigen::Index i = 0; i < in.rows(); ++i) {
      const ActivationValue av = ApplyActivation(activation, in(i, j));
      (*value)(i, j) = av.value;
      if (derivative) (*derivative)(i, j) = av.derivative;
    }
  }
}

}  // namespace svbn
