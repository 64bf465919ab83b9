// core/pca.h

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

#ifndef SVBN_CORE_PCA_H_
#define SVBN_CORE_PCA_H_

#include "core/common.h"

namespace svbn {

/// Mean + orthonormal projection, columns ordered by descending eigenvalue.
struct PcaModel {
  Vector mean;            // D_in
  Matrix projection;      // D_in x k
  Vector explained;       // k eigenvalues, non-increasing

  int input_dim() const { return static_cast<int>(mean.size()); }
  int output_dim() const { return static_cast<int>(projection.cols()); }
};

// Sample covariance (N-1 normalization) eigendecomposition, top-k
// eigenvectors kept. Sign convention: the largest-magnitude entry of each
// column is positive, so fits are reproducible.
PcaModel PcaFit(const Matrix& data, int k);

// Rows of `frames` projected: (x - mean)' P.
Matrix PcaProject(const PcaModel& model, const Matrix& frames);

// Row-wise concatenation of per-layer tap matrices (equal frame counts).
Matrix ConcatLayers(const std::vector<Matrix>& taps);

}  // namespace svbn

#endif  // SVBN_CORE_PCA_H_
