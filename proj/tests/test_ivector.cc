// tests/test_ivector.cc

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

#include <cmath>

#include "core/ivector.h"
#include "core/plda.h"
#include "doctest.h"

using namespace svbn;

namespace {
DiagGmm SeparatedUbm(int k, int d, double spread, double variance) {
  DiagGmm ubm;
  ubm.weights = Vector::Constant(k, 1.0 / k);
  ubm.means = Matrix::Zero(k, d);
  for (int c = 0; c < k; ++c) ubm.means(c, c % d) = spread * (c + 1);
  ubm.variances = Matrix::Constant(k, d, variance);
  return ubm;
}

Matrix SampleFromGmm(const DiagGmm& gmm, int frames, Rng* rng,
                     const Matrix* mean_offset = nullptr) {
  Matrix x(frames, gmm.Dim());
  for (int t = 0; t < frames; ++t) {
    // Component choice by cumulative weight.
    double u = rng->Uniform();
    int c = 0;
    while (c + 1 < gmm.NumComponents() && u > gmm.weights.head(c + 1).sum()) ++c;
    for (int j = 0; j < gmm.Dim(); ++j) {
      double mean = gmm.means(c, j);
      if (mean_offset) mean += (*mean_offset)(c, j);
      x(t, j) = mean + std::sqrt(gmm.variances(c, j)) * rng->Gaussian();
    }
  }
  return x;
}

// Largest principal angle (degrees) between the column spans.
double MaxPrincipalAngleDeg(const Matrix& a, const Matrix& b) {
  Eigen::HouseholderQR<Matrix> qa(a), qb(b);
  const Matrix q1 = qa.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix q2 = qb.householderQ() * Matrix::Identity(b.rows(), b.cols());
  Eigen::JacobiSVD<Matrix> svd(q1.transpose() * q2);
  const double smallest_sv = svd.singularValues().minCoeff();
  return std::acos(std::min(1.0, smallest_sv)) * 180.0 / M_PI;
}
}  // namespace

TEST_CASE("bw stats zeroth order sums to the frame count") {
  Rng rng(61);
  const DiagGmm ubm = SeparatedUbm(4, 3, 2.0, 0.5);
  const Matrix frames = SampleFromGmm(ubm, 137, &rng);
  const BwStats stats = ComputeBwStats(ubm, frames);
  CHECK(stats.n.sum() == doctest::Approx(137.0).epsilon(1e-9));
  CHECK(stats.f.allFinite());
}

TEST_CASE("a frame at a separated component mean loads only that component") {
  const DiagGmm ubm = SeparatedUbm(3, 3, 8.0, 0.05);
  Matrix frame(1, 3);
  frame = ubm.means.row(1);
  const BwStats stats = ComputeBwStats(ubm, frame);
  CHECK(stats.n(1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(stats.f.row(1).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(stats.n(0) < 1e-9);
  CHECK(stats.n(2) < 1e-9);
}

TEST_CASE("zero T matrix gives zero posterior means") {
  const DiagGmm ubm = SeparatedUbm(2, 2, 3.0, 1.0);
  TvModel tv;
  tv.ubm_means = ubm.means;
  tv.ubm_vars = ubm.variances;
  tv.t = Matrix::Zero(4, 2);
  BwStats stats;
  stats.n = Vector::Constant(2, 10.0);
  stats.f = Matrix::Random(2, 2);
  CHECK(ExtractIvector(tv, stats).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero stats give the prior mean") {
  Rng rng(62);
  const DiagGmm ubm = SeparatedUbm(2, 2, 3.0, 1.0);
  TvModel tv;
  tv.ubm_means = ubm.means;
  tv.ubm_vars = ubm.variances;
  tv.t = Matrix::Random(4, 2);
  BwStats stats;
  stats.n = Vector::Zero(2);
  stats.f = Matrix::Zero(2, 2);
  CHECK(ExtractIvector(tv, stats).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("extraction matches the dense-solve oracle") {
  // Dense route: build the full block system with generic matrices.
  Rng rng(63);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2, d = 2, r = trial < 5 ? 1 : 3;
    TvModel tv;
    tv.ubm_means = Matrix::Random(k, d);
    tv.ubm_vars = Matrix::Random(k, d).cwiseAbs() + Matrix::Constant(k, d, 0.2);
    tv.t = Matrix::Random(k * d, r);
    BwStats stats;
    stats.n = Vector::Random(k).cwiseAbs() * 20.0;
    stats.f = Matrix::Random(k, d);

    Matrix big_n = Matrix::Zero(k * d, k * d);       // diag(N_k I)
    Matrix big_sigma_inv = Matrix::Zero(k * d, k * d);
    Vector f_vec(k * d);
    for (int c = 0; c < k; ++c) {
      for (int j = 0; j < d; ++j) {
        big_n(c * d + j, c * d + j) = stats.n(c);
        big_sigma_inv(c * d + j, c * d + j) = 1.0 / tv.ubm_vars(c, j);
        f_vec(c * d + j) = stats.f(c, j);
      }
    }
    const Matrix lhs =
        Matrix::Identity(r, r) + tv.t.transpose() * big_sigma_inv * big_n * tv.t;
    const Vector rhs = tv.t.transpose() * big_sigma_inv * f_vec;
    const Vector oracle = lhs.fullPivLu().solve(rhs);
    const Vector fast = ExtractIvector(tv, stats);
    CHECK((fast - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("tv training recovers the generating subspace") {
  Rng rng(64);
  const int k = 4, d = 4, r = 2;
  const DiagGmm ubm = SeparatedUbm(k, d, 4.0, 0.25);
  Matrix t_true(k * d, r);
  for (Eigen::Index i = 0; i < t_true.size(); ++i) t_true.data()[i] = 0.8 * rng.Gaussian();

  std::vector<BwStats> stats;
  for (int u = 0; u < 500; ++u) {
    Vector w(r);
    for (int j = 0; j < r; ++j) w(j) = rng.Gaussian();
    const Vector shift = t_true * w;  // supervector offset
    Matrix offset(k, d);
    for (int c = 0; c < k; ++c)
      offset.row(c) = shift.segment(c * d, d).transpose();
    const Matrix frames = SampleFromGmm(ubm, 80, &rng, &offset);
    stats.push_back(ComputeBwStats(ubm, frames));
  }

  TvTrainOptions options;
  options.rank = r;
  options.em_iterations = 10;
  options.seed = 3;
  EmTrace trace;
  const TvModel tv = TrainTvMatrix(ubm, stats, options, &trace);
  CHECK(MaxPrincipalAngleDeg(tv.t, t_true) < 5.0);

  // EM objective is non-decreasing.
  for (size_t i = 1; i < trace.objectives.size(); ++i) {
    const double prev = trace.objectives[i - 1];
    CHECK(trace.objectives[i] >= prev - 1e-8 * std::abs(prev));
  }
}

TEST_CASE("enrollment averaging") {
  Vector a(3), b(3), c(3);
  a << 1, 0, 0;
  b << 0, 1, 0;
  c << 0, 0, 1;
  // One session: that i-vector, normalized.
  const Vector one = EnrollSpeakerIvector({2.0 * a});
  CHECK((one - a).cwiseAbs().maxCoeff() < 1e-12);
  // Mean of three sessions, then normalized.
  const Vector three = EnrollSpeakerIvector({a, b, c});
  const Vector expected = Vector::Constant(3, 1.0 / std::sqrt(3.0));
  CHECK((three - expected).cwiseAbs().maxCoeff() < 1e-12);
  // Antipodal sessions cancel and trip the normalization guard.
  CHECK_THROWS_AS(EnrollSpeakerIvector({a, -a}), Error);
}

namespace {
Matrix RandomPsd(int r, double scale, Rng* rng) {
  Matrix a(r, r);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng->Gaussian();
  return scale * (a * a.transpose()) / r + 0.05 * scale * Matrix::Identity(r, r);
}

Vector SampleGaussian(const Matrix& cov_chol, Rng* rng) {
  Vector z(cov_chol.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng->Gaussian();
  return cov_chol * z;
}
}  // namespace

TEST_CASE("plda training recovers synthetic covariances") {
  Rng rng(65);
  const int r = 4;
  const Matrix b_true = RandomPsd(r, 2.0, &rng);
  const Matrix w_true = RandomPsd(r, 0.5, &rng);
  const Matrix b_chol = Eigen::LLT<Matrix>(b_true).matrixL();
  const Matrix w_chol = Eigen::LLT<Matrix>(w_true).matrixL();

  std::vector<Vector> ivectors;
  std::vector<int> labels;
  const int classes = 200, per_class = 10;
  for (int cls = 0; cls < classes; ++cls) {
    const Vector y = SampleGaussian(b_chol, &rng);
    for (int s = 0; s < per_class; ++s) {
      ivectors.push_back(y + SampleGaussian(w_chol, &rng));
      labels.push_back(cls);
    }
  }

  EmTrace trace;
  const PldaModel model = PldaTrain(ivectors, labels, 20, &trace);
  CHECK((model.between - b_true).norm() / b_true.norm() < 0.15);
  CHECK((model.within - w_true).norm() / w_true.norm() < 0.15);
  for (size_t i = 1; i < trace.objectives.size(); ++i) {
    const double prev = trace.objectives[i - 1];
    CHECK(trace.objectives[i] >= prev - 1e-8 * std::abs(prev));
  }
}

TEST_CASE("zero within-class scatter floors W and keeps B near total scatter") {
  Rng rng(66);
  std::vector<Vector> ivectors;
  std::vector<int> labels;
  for (int cls = 0; cls < 40; ++cls) {
    Vector y(3);
    for (int j = 0; j < 3; ++j) y(j) = rng.Gaussian();
    for (int s = 0; s < 4; ++s) {
      ivectors.push_back(y);  // identical samples per class
      labels.push_back(cls);
    }
  }
  const PldaModel model = PldaTrain(ivectors, labels, 8);
  CHECK(model.within.norm() < 1e-6);
  // B absorbs essentially all the variance.
  Matrix total = Matrix::Zero(3, 3);
  for (const auto& v : ivectors) {
    const Vector c = v - model.mean;
    total += c * c.transpose();
  }
  total /= static_cast<double>(ivectors.size());
  CHECK((model.between - total).norm() / total.norm() < 0.05);
}

TEST_CASE("plda marginal likelihood matches a dense joint-gaussian oracle") {
  Rng rng(67);
  const int r = 3;
  PldaModel model;
  model.mean = Vector::Zero(r);
  for (int j = 0; j < r; ++j) model.mean(j) = rng.Gaussian();
  model.between = RandomPsd(r, 1.0, &rng);
  model.within = RandomPsd(r, 0.7, &rng);

  // One class of n samples: joint covariance I_n (x) W + J_n (x) B.
  const int n = 4;
  std::vector<Vector> samples;
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    Vector v(r);
    for (int j = 0; j < r; ++j) v(j) = 2.0 * rng.Gaussian();
    samples.push_back(v);
    labels.push_back(0);
  }
  Matrix joint_cov = Matrix::Zero(n * r, n * r);
  Vector joint_x(n * r);
  for (int i = 0; i < n; ++i) {
    joint_x.segment(i * r, r) = samples[i] - model.mean;
    for (int j = 0; j < n; ++j) {
      joint_cov.block(i * r, j * r, r, r) = model.between;
      if (i == j) joint_cov.block(i * r, j * r, r, r) += model.within;
    }
  }
  const double logdet = std::log(joint_cov.fullPivLu().determinant());
  const double quad = joint_x.dot(joint_cov.fullPivLu().solve(joint_x));
  const double oracle =
      -0.5 * (n * r * std::log(2.0 * M_PI) + logdet + quad);
  CHECK(PldaLogLikelihood(model, samples, labels) ==
        doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("plda score is symmetric") {
  Rng rng(68);
  PldaModel model;
  model.mean = Vector::Zero(4);
  model.between = RandomPsd(4, 1.0, &rng);
  model.within = RandomPsd(4, 0.5, &rng);
  for (int trial = 0; trial < 10; ++trial) {
    Vector e(4), t(4);
    for (int j = 0; j < 4; ++j) {
      e(j) = rng.Gaussian();
      t(j) = rng.Gaussian();
    }
    CHECK(PldaScore(model, e, t) == doctest::Approx(PldaScore(model, t, e)).epsilon(1e-10));
  }
}

TEST_CASE("plda score is zero when B vanishes") {
  Rng rng(69);
  PldaModel model;
  model.mean = Vector::Zero(3);
  model.between = Matrix::Zero(3, 3);
  model.within = RandomPsd(3, 1.0, &rng);
  for (int trial = 0; trial < 5; ++trial) {
    Vector e(3), t(3);
    for (int j = 0; j < 3; ++j) {
      e(j) = rng.Gaussian();
      t(j) = rng.Gaussian();
    }
    CHECK(std::abs(PldaScore(model, e, t)) < 1e-10);
  }
}

TEST_CASE("one-dimensional plda score matches the scalar oracle") {
  PldaModel model;
  model.mean = Vector::Constant(1, 0.3);
  model.between = Matrix::Constant(1, 1, 1.5);
  model.within = Matrix::Constant(1, 1, 0.6);
  const double e = 1.1, t = 0.9;
  const double b = 1.5, w = 0.6;
  const double ec = e - 0.3, tc = t - 0.3;
  // Same: cov [[b+w, b],[b, b+w]]; different: diag(b+w).
  const double det_same = (b + w) * (b + w) - b * b;
  const double q_same =
      ((b + w) * ec * ec - 2.0 * b * ec * tc + (b + w) * tc * tc) / det_same;
  const double log_same = -0.5 * (std::log(det_same) + q_same);
  const double log_diff =
      -0.5 * (2.0 * std::log(b + w) + (ec * ec + tc * tc) / (b + w));
  Vector ev = Vector::Constant(1, e), tv = Vector::Constant(1, t);
  CHECK(PldaScore(model, ev, tv) == doctest::Approx(log_same - log_diff).epsilon(1e-9));
}

TEST_CASE("plda score is invariant under joint orthogonal rotation") {
  Rng rng(70);
  const int r = 4;
  PldaModel model;
  model.mean = Vector::Zero(r);
  for (int j = 0; j < r; ++j) model.mean(j) = rng.Gaussian();
  model.between = RandomPsd(r, 1.0, &rng);
  model.within = RandomPsd(r, 0.4, &rng);
  Vector e(r), t(r);
  for (int j = 0; j < r; ++j) {
    e(j) = rng.Gaussian();
    t(j) = rng.Gaussian();
  }
  // Random orthogonal matrix from QR.
  Matrix g(r, r);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.Gaussian();
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();

  PldaModel rotated;
  rotated.mean = q * model.mean;
  rotated.between = q * model.between * q.transpose();
  rotated.within = q * model.within * q.transpose();
  CHECK(PldaScore(rotated, q * e, q * t) ==
        doctest::Approx(PldaScore(model, e, t)).epsilon(1e-9));
}

TEST_CASE("plda model check rejects asymmetry and negative eigenvalues") {
  PldaModel model;
  model.mean = Vector::Zero(2);
  model.between = Matrix::Identity(2, 2);
  model.within = Matrix::Identity(2, 2);
  model.Check();
  model.between(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(model.Check(), Error);
  model.between(0, 1) = 0.0;
  model.within = -Matrix::Identity(2, 2);
  CHECK_THROWS_AS(model.Check(), Error);
}

TEST_CASE("plda preprocess centers then length-normalizes") {
  PldaModel model;
  model.center = Vector::Constant(3, 1.0);
  model.mean = Vector::Zero(3);
  model.between = Matrix::Identity(3, 3);
  model.within = Matrix::Identity(3, 3);
  Vector raw(3);
  raw << 4.0, 1.0, 1.0;
  const Vector processed = model.Preprocess(raw);
  CHECK(processed(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(processed(1)) < 1e-12);
  CHECK(processed.norm() == doctest::Approx(1.0).epsilon(1e-12));
}
