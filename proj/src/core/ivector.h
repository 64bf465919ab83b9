// core/ivector.h

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

#ifndef SVBN_CORE_IVECTOR_H_
#define SVBN_CORE_IVECTOR_H_

#include <vector>

#include "core/common.h"
#include "core/gmm.h"

namespace svbn {

/// Zeroth- and centered first-order Baum-Welch statistics against a UBM.
struct BwStats {
  Vector n;  // K
  Matrix f;  // K x D, sum_t gamma_t(k) (x_t - m_k)

  int NumComponents() const { return static_cast<int>(n.size()); }
  int Dim() const { return static_cast<int>(f.cols()); }
};

BwStats ComputeBwStats(const DiagGmm& ubm, const Matrix& frames);

/// Total-variability model: supervector = M + T w, prior w ~ N(0, I).
/// The UBM means and variances travel with the model so files are
/// self-contained.
struct TvModel {
  Matrix t;          // (K*D) x R, component blocks stacked
  Matrix ubm_means;  // K x D
  Matrix ubm_vars;   // K x D

  int NumComponents() const { return static_cast<int>(ubm_means.rows()); }
  int Dim() const { return static_cast<int>(ubm_means.cols()); }
  int Rank() const { return static_cast<int>(t.cols()); }
};

struct TvTrainOptions {
  int rank = 100;
  int em_iterations = 10;
  uint64_t seed = 11;
};

struct EmTrace {
  std::vector<double> objectives;  // one per EM iteration
  int jittered_solves = 0;
};

// EM over per-utterance stats. The tracked objective is the T-dependent part
// of the marginal log-likelihood, non-decreasing per iteration.
TvModel TrainTvMatrix(const DiagGmm& ubm, const std::vector<BwStats>& stats,
                      const TvTrainOptions& options, EmTrace* trace = nullptr);

// Posterior mean (I + T' Sigma^-1 N T)^-1 T' Sigma^-1 F.
Vector ExtractIvector(const TvModel& tv, const BwStats& stats);

// v / ||v||; a near-zero norm is a degenerate-input error.
Vector LengthNormalize(const Vector& v);

// Arithmetic mean of the session i-vectors, then length-normalized.
Vector EnrollSpeakerIvector(const std::vector<Vector>& session_ivectors);

}  // namespace svbn

#endif  // SVBN_CORE_IVECTOR_H_
