// core/pca.cc

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

#include "core/pca.h"

#include <cmath>

namespace svbn {

PcaModel PcaFit(const Matrix& data, int k) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (k < 1 || k > d)
    Throw(Status::kConfig, "pca_fit: k must be in 1..input dim (" + std::to_string(k) +
                               " vs " + std::to_string(d) + ")");
  if (n <= k) Throw(Status::kArg, "pca_fit: need more samples than components");

  PcaModel model;
  model.mean = data.colwise().mean().transpose();
  Matrix centered = data.rowwise() - model.mean.transpose();
  Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success)
    Throw(Status::kNumeric, "pca_fit: eigendecomposition failed");

  // SelfAdjointEigenSolver sorts ascending; take the top k in reverse.
  model.projection.resize(d, k);
  model.explained.resize(k);
  for (int j = 0; j < k; ++j) {
    const Eigen::Index src = d - 1 - j;
    Vector col = solver.eigenvectors().col(src);
    Eigen::Index max_at = 0;
    col.cwiseAbs().maxCoeff(&max_at);
    if (col(max_at) < 0.0) col = -col;
    model.projection.col(j) = col;
    model.explained(j) = solver.eigenvalues()(src);
  }
  return model;
}

Matrix PcaProject(const PcaModel& model, const Matrix& frames) {
  if (frames.cols() != model.input_dim())
    Throw(Status::kArg, "pca_project: input dim " + std::to_string(frames.cols()) +
                            " != model dim " + std::to_string(model.input_dim()));
  return (frames.rowwise() - model.mean.transpose()) * model.projection;
}

Matrix ConcatLayers(const std::vector<Matrix>& taps) {
  if (taps.empty()) Throw(Status::kArg, "concat_layers: no inputs");
  Eigen::Index rows = taps.front().rows();
  Eigen::Index cols = 0;
  for (const auto& t : taps) {
    if (t.rows() != rows)
      Throw(Status::kArg, "concat_layers: frame-count mismatch");
    cols += t.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& t : taps) {
    out.middleCols(at, t.cols()) = t;
    at += t.cols();
  }
  return out;
}

}  // namespace svbn
