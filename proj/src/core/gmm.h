// core/gmm.h

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

#ifndef SVBN_CORE_GMM_H_
#define SVBN_CORE_GMM_H_

#include <string>
#include <vector>

#include "core/common.h"

namespace svbn {

/// Diagonal-covariance mixture. Weights sum to one; variances are floored.
struct DiagGmm {
  Vector weights;    // K
  Matrix means;      // K x D
  Matrix variances;  // K x D

  int NumComponents() const { return static_cast<int>(weights.size()); }
  int Dim() const { return static_cast<int>(means.cols()); }
  void Check() const;
};

struct UbmTrainOptions {
  int num_components = 512;
  int em_iterations = 10;
  uint64_t seed = 7;
  double variance_floor_factor = 1e-4;  // times the global per-dim variance
  int kmeans_iterations = 5;
  int kmeans_subsample = 100000;
};

struct UbmTrainStats {
  std::vector<double> log_likelihoods;  // per-EM-iteration average
  int reseeded_components = 0;
};

// Seeded k-means++ init then EM; the per-frame average log-likelihood is
// non-decreasing (within 1e-8 relative) across iterations. Empty components
// are re-seeded from a perturbation of the heaviest one.
DiagGmm UbmTrainEm(const Matrix& frames, const UbmTrainOptions& options,
                   UbmTrainStats* stats = nullptr);

// Per-frame log p(x | gmm), log-sum-exp over components.
Vector GmmFrameLogLikelihoods(const DiagGmm& gmm, const Matrix& frames);
double GmmTotalLogLikelihood(const DiagGmm& gmm, const Matrix& frames);

// Frame-level posteriors, T x K.
Matrix GmmPosteriors(const DiagGmm& gmm, const Matrix& frames);

// Mean-only MAP adaptation with relevance factor r. Each iteration
// recomputes posteriors against the model adapted so far; pass
// posteriors_from_ubm=true to hold them at the UBM instead. Empty enrollment
// returns the UBM unchanged.
DiagGmm MapAdapt(const DiagGmm& ubm, const Matrix& enrollment_frames, double relevance,
                 int iterations, bool posteriors_from_ubm = false);

// (1/N) sum_i [log p(x_i|target) - log p(x_i|ubm)].
double LlrScore(const DiagGmm& target, const DiagGmm& ubm, const Matrix& frames);

}  // namespace svbn

#endif  // SVBN_CORE_GMM_H_
