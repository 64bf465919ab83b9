// core/gmm.cc

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

#include "core/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svbn {

namespace {
const double kLog2Pi = 1.8378770664093454836;

// Per-frame, per-component log p(x, k): T x K.
Matrix ComponentLogLikelihoods(const DiagGmm& gmm, const Matrix& frames) {
  const int k = gmm.NumComponents();
  const Eigen::Index t = frames.rows();
  Matrix ll(t, k);
  for (int c = 0; c < k; ++c) {
    const auto var = gmm.variances.row(c).array();
    const double constant = std::log(gmm.weights(c)) -
                            0.5 * (var.log().sum() + gmm.Dim() * kLog2Pi);
    const Eigen::ArrayXXd centered =
        frames.rowwise() - gmm.means.row(c);
    ll.col(c) = constant -
                0.5 * (centered.array().square().rowwise() * var.inverse()).rowwise().sum();
  }
  return ll;
}

Vector RowLogSumExp(const Matrix& m) {
  Vector out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    out(i) = mx + std::log((m.row(i).array() - mx).exp().sum());
  }
  return out;
}

Vector GlobalVarianceFloor(const Matrix& frames, double factor) {
  const Eigen::Index t = frames.rows();
  Eigen::RowVectorXd mean = frames.colwise().mean();
  Eigen::RowVectorXd var =
      (frames.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(t);
  Vector floor = (var * factor).transpose();
  for (Eigen::Index j = 0; j < floor.size(); ++j)
    floor(j) = std::max(floor(j), 1e-10);
  return floor;
}

// Seeded k-means++ centers followed by a few Lloyd passes.
Matrix KmeansCenters(const Matrix& data, int k, int iterations, Rng* rng) {
  const Eigen::Index n = data.rows();
  Matrix centers(k, data.cols());
  Vector min_dist = Vector::Constant(n, std::numeric_limits<double>::infinity());
  centers.row(0) = data.row(static_cast<Eigen::Index>(rng->Integer(n)));
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (data.row(i) - centers.row(c - 1)).squaredNorm();
      min_dist(i) = std::min(min_dist(i), d);
    }
    const double total = min_dist.sum();
    if (total <= 0.0) {
      centers.row(c) = data.row(static_cast<Eigen::Index>(rng->Integer(n)));
      continue;
    }
    double pick = rng->Uniform() * total;
    Eigen::Index chosen = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      pick -= min_dist(i);
      if (pick <= 0.0) {
        chosen = i;
        break;
      }
    }
    centers.row(c) = data.row(chosen);
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < iterations; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (data.row(i) - centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          assign[i] = c;
        }
      }
    }
    Matrix sums = Matrix::Zero(k, data.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[i]) += data.row(i);
      counts[assign[i]]++;
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0) centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
  }
  return centers;
}
}  // namespace

void DiagGmm::Check() const {
  if (weights.size() != means.rows() || means.rows() != variances.rows() ||
      means.cols() != variances.cols())
    Throw(Status::kFormat, "DiagGmm: inconsistent shapes");
  const double sum = weights.sum();
  if (std::abs(sum - 1.0) > 1e-9)
    Throw(Status::kNumeric, "DiagGmm: weights sum to " + std::to_string(sum));
  for (Eigen::Index c = 0; c < weights.size(); ++c) {
    if (!(weights(c) > 0.0)) Throw(Status::kNumeric, "DiagGmm: non-positive weight");
    for (Eigen::Index j = 0; j < variances.cols(); ++j)
      if (!(variances(c, j) > 0.0)) Throw(Status::kNumeric, "DiagGmm: non-positive variance");
  }
}

DiagGmm UbmTrainEm(const Matrix& frames, const UbmTrainOptions& options,
                   UbmTrainStats* stats) {
  const Eigen::Index t = frames.rows();
  const int k = options.num_components;
  if (k < 1) Throw(Status::kConfig, "ubm_train_em: need at least one component");
  if (t < k)
    Throw(Status::kArg, "ubm_train_em: pool smaller than component count");

  const Vector floor = GlobalVarianceFloor(frames, options.variance_floor_factor);
  Rng rng(options.seed);

  // Init on a subsample.
  Matrix subsample;
  if (t > options.kmeans_subsample) {
    std::vector<uint32_t> pick = rng.Permutation(static_cast<uint32_t>(t));
    subsample.resize(options.kmeans_subsample, frames.cols());
    for (int i = 0; i < options.kmeans_subsample; ++i)
      subsample.row(i) = frames.row(pick[i]);
  } else {
    subsample = frames;
  }

  DiagGmm gmm;
  gmm.weights = Vector::Constant(k, 1.0 / k);
  gmm.means = KmeansCenters(subsample, k, options.kmeans_iterations, &rng);
  gmm.variances.resize(k, frames.cols());
  {
    // Start every component from the global variance.
    Eigen::RowVectorXd mean = frames.colwise().mean();
    Eigen::RowVectorXd var =
        (frames.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(t);
    for (int c = 0; c < k; ++c)
      gmm.variances.row(c) = var.cwiseMax(floor.transpose());
  }

  for (int iter = 0; iter < options.em_iterations; ++iter) {
    Matrix ll = ComponentLogLikelihoods(gmm, frames);
    Vector frame_ll = RowLogSumExp(ll);
    if (stats) stats->log_likelihoods.push_back(frame_ll.sum() / static_cast<double>(t));

    Matrix post = (ll.colwise() - frame_ll).array().exp();
    Vector nk = post.colwise().sum().transpose();
    Matrix first = post.transpose() * frames;                        // K x D
    Matrix second = post.transpose() * frames.cwiseProduct(frames);  // K x D

    for (int c = 0; c < k; ++c) {
      if (nk(c) < 1e-8) {
        // Re-seed from a perturbation of the heaviest component.
        Eigen::Index heavy = 0;
        nk.maxCoeff(&heavy);
        for (Eigen::Index j = 0; j < frames.cols(); ++j)
          gmm.means(c, j) = gmm.means(heavy, j) +
                            0.1 * std::sqrt(gmm.variances(heavy, j)) * rng.Gaussian();
        gmm.variances.row(c) = gmm.variances.row(heavy);
        gmm.weights(c) = 1e-6;
        if (stats) stats->reseeded_components++;
        continue;
      }
      gmm.weights(c) = nk(c) / static_cast<double>(t);
      gmm.means.row(c) = first.row(c) / nk(c);
      Eigen::RowVectorXd var =
          second.row(c) / nk(c) - gmm.means.row(c).cwiseProduct(gmm.means.row(c));
      gmm.variances.row(c) = var.cwiseMax(floor.transpose());
    }
    gmm.weights /= gmm.weights.sum();
  }
  if (stats) {
    Vector frame_ll = RowLogSumExp(ComponentLogLikelihoods(gmm, frames));
    stats->log_likelihoods.push_back(frame_ll.sum() / static_cast<double>(t));
  }
  gmm.Check();
  return gmm;
}

Vector GmmFrameLogLikelihoods(const DiagGmm& gmm, const Matrix& frames) {
  return RowLogSumExp(ComponentLogLikelihoods(gmm, frames));
}

double GmmTotalLogLikelihood(const DiagGmm& gmm, const Matrix& frames) {
  return GmmFrameLogLikelihoods(gmm, frames).sum();
}

Matrix GmmPosteriors(const DiagGmm& gmm, const Matrix& frames) {
  Matrix ll = ComponentLogLikelihoods(gmm, frames);
  Vector frame_ll = RowLogSumExp(ll);
  return (ll.colwise() - frame_ll).array().exp();
}

DiagGmm MapAdapt(const DiagGmm& ubm, const Matrix& enrollment_frames, double relevance,
                 int iterations, bool posteriors_from_ubm) {
  if (relevance <= 0.0) Throw(Status::kConfig, "map_adapt: relevance must be positive");
  DiagGmm adapted = ubm;
  if (enrollment_frames.rows() == 0) return adapted;
  for (int iter = 0; iter < iterations; ++iter) {
    const DiagGmm& posterior_model = posteriors_from_ubm ? ubm : adapted;
    Matrix post = GmmPosteriors(posterior_model, enrollment_frames);
    Vector nk = post.colwise().sum().transpose();
    Matrix first = post.transpose() * enrollment_frames;  // K x D
    for (int c = 0; c < adapted.NumComponents(); ++c) {
      if (nk(c) <= 0.0) continue;  // alpha = 0: prior mean kept
      const double alpha = nk(c) / (nk(c) + relevance);
      const Eigen::RowVectorXd data_mean = first.row(c) / nk(c);
      adapted.means.row(c) = alpha * data_mean + (1.0 - alpha) * adapted.means.row(c);
    }
  }
  return adapted;
}

double LlrScore(const DiagGmm& target, const DiagGmm& ubm, const Matrix& frames) {
  if (frames.rows() < 1) Throw(Status::kArg, "llr_score: need at least one frame");
  const double tar = GmmTotalLogLikelihood(target, frames);
  const double bg = GmmTotalLogLikelihood(ubm, frames);
  return (tar - bg) / static_cast<double>(frames.rows());
}

}  // namespace svbn
