// core/plda.h

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

#ifndef SVBN_CORE_PLDA_H_
#define SVBN_CORE_PLDA_H_

#include <vector>

#include "core/common.h"
#include "core/ivector.h"

namespace svbn {

/// Two-covariance model x = mu + y + e, y ~ N(0, B), e ~ N(0, W).
/// `center` is the raw-space centering vector applied (with length
/// normalization) before any PLDA computation; empty means none.
struct PldaModel {
  Vector center;   // raw i-vector centering (may be empty)
  Vector mean;     // mu in processed space
  Matrix between;  // B
  Matrix within;   // W

  int Dim() const { return static_cast<int>(mean.size()); }
  // Symmetry within 1e-9 and eigenvalues >= -1e-9 for both covariances.
  void Check() const;
  // Centering + length normalization of a raw i-vector.
  Vector Preprocess(const Vector& raw) const;
};

// EM for the two-covariance model; classes with a single sample are counted
// in *singleton_classes. The traced objective is the exact marginal
// log-likelihood, non-decreasing per iteration.
PldaModel PldaTrain(const std::vector<Vector>& ivectors, const std::vector<int>& labels,
                    int iterations, EmTrace* trace = nullptr,
                    int* singleton_classes = nullptr);

// log N([e;t]; same-speaker) - log N([e;t]; different-speaker), closed form.
// Inputs are processed-space vectors (see PldaModel::Preprocess).
double PldaScore(const PldaModel& model, const Vector& enroll, const Vector& test);

// Exact marginal log-likelihood of a label-grouped sample set; exposed for
// the EM-monotonicity assertions and the dense oracle tests.
double PldaLogLikelihood(const PldaModel& model, const std::vector<Vector>& ivectors,
                         const std::vector<int>& labels);

// Precomputed factorizations for scoring many trials against one model.
class PldaScorer {
 public:
  explicit PldaScorer(const PldaModel& model);
  double Score(const Vector& enroll, const Vector& test) const;

 private:
  Vector mean_;
  Matrix inv_same_, inv_diff_;
  double logdet_same_ = 0.0, logdet_diff_ = 0.0;
};

}  // namespace svbn

#endif  // SVBN_CORE_PLDA_H_
