// core/ivector.cc

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

#include "core/ivector.h"

#include <cmath>

namespace svbn {

BwStats ComputeBwStats(const DiagGmm& ubm, const Matrix& frames) {
  if (frames.rows() < 1) Throw(Status::kArg, "bw_stats: need at least one frame");
  Matrix post = GmmPosteriors(ubm, frames);  // T x K
  BwStats stats;
  stats.n = post.colwise().sum().transpose();
  stats.f = post.transpose() * frames;  // K x D
  for (int c = 0; c < ubm.NumComponents(); ++c)
    stats.f.row(c) -= stats.n(c) * ubm.means.row(c);
  return stats;
}

namespace {

// Per-utterance posterior of w given stats: precision L = I + sum_k N_k
// T_k' Sigma_k^-1 T_k, mean L^-1 b with b = T' Sigma^-1 F.
struct Posterior {
  Matrix precision;  // R x R
  Vector b;          // R
  Vector mean;       // R
  Matrix covariance; // R x R
  double objective;  // -0.5 logdet L + 0.5 b' mean
};

Posterior ComputePosterior(const TvModel& tv, const BwStats& stats) {
  const int k = tv.NumComponents();
  const int d = tv.Dim();
  const int r = tv.Rank();
  Posterior post;
  post.precision = Matrix::Identity(r, r);
  post.b = Vector::Zero(r);
  for (int c = 0; c < k; ++c) {
    const auto t_block = tv.t.middleRows(static_cast<Eigen::Index>(c) * d, d);  // D x R
    const Vector inv_var = tv.ubm_vars.row(c).cwiseInverse().transpose();
    const Matrix t_scaled = inv_var.asDiagonal() * t_block;  // Sigma_k^-1 T_k
    post.precision.noalias() += stats.n(c) * t_block.transpose() * t_scaled;
    post.b.noalias() += t_scaled.transpose() * stats.f.row(c).transpose();
  }
  Eigen::LDLT<Matrix> ldlt(post.precision);
  post.mean = ldlt.solve(post.b);
  post.covariance = ldlt.solve(Matrix::Identity(r, r));
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < r; ++i)
    logdet += std::log(std::max(ldlt.vectorD()(i), 1e-300));
  post.objective = -0.5 * logdet + 0.5 * post.b.dot(post.mean);
  return post;
}

}  // namespace

TvModel TrainTvMatrix(const DiagGmm& ubm, const std::vector<BwStats>& stats,
                      const TvTrainOptions& options, EmTrace* trace) {
  const int k = ubm.NumComponents();
  const int d = ubm.Dim();
  const int r = options.rank;
  if (r < 1 || r >= k * d)
    Throw(Status::kConfig, "train_tmatrix: rank must be in 1..K*D-1");
  if (stats.empty()) Throw(Status::kArg, "train_tmatrix: no training stats");

  TvModel tv;
  tv.ubm_means = ubm.means;
  tv.ubm_vars = ubm.variances;
  // Zero init is a fixed point of the EM updates; random init is required.
  Rng rng(options.seed);
  tv.t.resize(static_cast<Eigen::Index>(k) * d, r);
  for (Eigen::Index j = 0; j < tv.t.cols(); ++j)
    for (Eigen::Index i = 0; i < tv.t.rows(); ++i) tv.t(i, j) = 0.1 * rng.Gaussian();

  for (int iter = 0; iter < options.em_iterations; ++iter) {
    std::vector<Matrix> a(k, Matrix::Zero(r, r));  // sum_u N_k(u) E[ww']
    Matrix c_acc = Matrix::Zero(static_cast<Eigen::Index>(k) * d, r);
    double objective = 0.0;
    for (const BwStats& s : stats) {
      Posterior post = ComputePosterior(tv, s);
      objective += post.objective;
      const Matrix second = post.covariance + post.mean * post.mean.transpose();
      for (int c = 0; c < k; ++c) {
        a[c].noalias() += s.n(c) * second;
        c_acc.middleRows(static_cast<Eigen::Index>(c) * d, d).noalias() +=
            s.f.row(c).transpose() * post.mean.transpose();
      }
    }
    if (trace) trace->objectives.push_back(objective);

    // Per-component solve T_k A_k = C_k; diagonal covariances cancel.
    for (int c = 0; c < k; ++c) {
      Eigen::LDLT<Matrix> ldlt(a[c]);
      if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < 1e-12) {
        a[c] += 1e-8 * Matrix::Identity(r, r);
        ldlt.compute(a[c]);
        if (trace) trace->jittered_solves++;
      }
      tv.t.middleRows(static_cast<Eigen::Index>(c) * d, d) =
          ldlt.solve(c_acc.middleRows(static_cast<Eigen::Index>(c) * d, d).transpose())
              .transpose();
    }
  }
  if (trace) {
    double objective = 0.0;
    for (const BwStats& s : stats) objective += ComputePosterior(tv, s).objective;
    trace->objectives.push_back(objective);
  }
  RequireFinite(tv.t, "train_tmatrix");
  return tv;
}

Vector ExtractIvector(const TvModel& tv, const BwStats& stats) {
  if (stats.NumComponents() != tv.NumComponents() || stats.Dim() != tv.Dim())
    Throw(Status::kArg, "extract_ivector: stats do not match the model");
  return ComputePosterior(tv, stats).mean;
}

Vector LengthNormalize(const Vector& v) {
  const double norm = v.norm();
  if (norm < 1e-12)
    Throw(Status::kNumeric, "length_normalize: zero-norm vector");
  return v / norm;
}

Vector EnrollSpeakerIvector(const std::vector<Vector>& session_ivectors) {
  if (session_ivectors.empty())
    Throw(Status::kArg, "enroll_speaker: need at least one session");
  Vector mean = Vector::Zero(session_ivectors.front().size());
  for (const auto& v : session_ivectors) {
    if (v.size() != mean.size())
      Throw(Status::kArg, "enroll_speaker: inconsistent i-vector dims");
    mean += v;
  }
  mean /= static_cast<double>(session_ivectors.size());
  return LengthNormalize(mean);
}

}  // namespace svbn
