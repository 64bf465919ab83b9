// tests/test_gmm.cc

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

#include "core/gmm.h"
#include "doctest.h"

using namespace svbn;

namespace {
Matrix GaussianBlob(int n, const Vector& mean, double sigma, Rng* rng) {
  Matrix m(n, mean.size());
  for (int i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < mean.size(); ++j)
      m(i, j) = mean(j) + sigma * rng->Gaussian();
  return m;
}

DiagGmm SingleGaussian(const Vector& mean, const Vector& variance) {
  DiagGmm gmm;
  gmm.weights = Vector::Ones(1);
  gmm.means = mean.transpose();
  gmm.variances = variance.transpose();
  return gmm;
}
}  // namespace

TEST_CASE("K=1 EM recovers the pool mean and variance in closed form") {
  Rng rng(51);
  const Matrix pool = GaussianBlob(4000, Vector::Constant(3, 1.5), 0.7, &rng);
  UbmTrainOptions options;
  options.num_components = 1;
  options.em_iterations = 3;
  const DiagGmm gmm = UbmTrainEm(pool, options);
  const Eigen::RowVectorXd mean = pool.colwise().mean();
  Eigen::RowVectorXd var =
      (pool.rowwise() - mean).array().square().colwise().sum() / pool.rows();
  CHECK((gmm.means.row(0) - mean).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((gmm.variances.row(0) - var).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(gmm.weights(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("K=2 EM separates two synthetic clusters") {
  Rng rng(52);
  Vector mu_a = Vector::Constant(4, -2.0);
  Vector mu_b = Vector::Constant(4, 2.0);
  Matrix pool(3000, 4);
  pool << GaussianBlob(1500, mu_a, 0.1, &rng), GaussianBlob(1500, mu_b, 0.1, &rng);
  UbmTrainOptions options;
  options.num_components = 2;
  options.em_iterations = 10;
  options.seed = 5;
  const DiagGmm gmm = UbmTrainEm(pool, options);
  // Each true mean is recovered by one component within 0.1.
  for (const Vector& mu : {mu_a, mu_b}) {
    double best = 1e300;
    for (int c = 0; c < 2; ++c)
      best = std::min(best, (gmm.means.row(c).transpose() - mu).norm());
    CHECK(best < 0.1);
  }
  CHECK(gmm.weights.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("EM log-likelihood is non-decreasing") {
  Rng rng(53);
  Matrix pool(2400, 3);
  pool << GaussianBlob(800, Vector::Constant(3, -3.0), 0.5, &rng),
      GaussianBlob(800, Vector::Zero(3), 0.8, &rng),
      GaussianBlob(800, Vector::Constant(3, 2.5), 0.3, &rng);
  UbmTrainOptions options;
  options.num_components = 8;
  options.em_iterations = 20;
  UbmTrainStats stats;
  UbmTrainEm(pool, options, &stats);
  REQUIRE(stats.log_likelihoods.size() >= 2);
  for (size_t i = 1; i < stats.log_likelihoods.size(); ++i) {
    const double prev = stats.log_likelihoods[i - 1];
    CHECK(stats.log_likelihoods[i] >= prev - 1e-8 * std::abs(prev));
  }
}

TEST_CASE("gmm invariants hold after training") {
  Rng rng(54);
  const Matrix pool = GaussianBlob(2000, Vector::Zero(5), 1.0, &rng);
  UbmTrainOptions options;
  options.num_components = 16;
  options.em_iterations = 5;
  const DiagGmm gmm = UbmTrainEm(pool, options);
  gmm.Check();  // throws on violation
  CHECK(std::abs(gmm.weights.sum() - 1.0) < 1e-9);
  CHECK(gmm.variances.minCoeff() > 0.0);
}

TEST_CASE("map with no enrollment returns the ubm exactly") {
  Rng rng(55);
  const Matrix pool = GaussianBlob(1000, Vector::Zero(3), 1.0, &rng);
  UbmTrainOptions options;
  options.num_components = 4;
  options.em_iterations = 3;
  const DiagGmm ubm = UbmTrainEm(pool, options);
  const DiagGmm adapted = MapAdapt(ubm, Matrix(0, 3), 10.0, 3);
  CHECK((adapted.means - ubm.means).cwiseAbs().maxCoeff() == 0.0);
  CHECK((adapted.variances - ubm.variances).cwiseAbs().maxCoeff() == 0.0);
  CHECK((adapted.weights - ubm.weights).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("large relevance keeps the adapted means at the ubm") {
  Rng rng(56);
  const DiagGmm ubm = SingleGaussian(Vector::Zero(2), Vector::Ones(2));
  const Matrix enroll = GaussianBlob(20, Vector::Constant(2, 5.0), 0.1, &rng);
  const DiagGmm adapted = MapAdapt(ubm, enroll, 1e12, 1);
  CHECK((adapted.means - ubm.means).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("single component relevance-equal-count gives the exact midpoint") {
  // alpha = n/(n+r) = 0.5 when r equals the frame count; one iteration moves
  // the mean halfway from the prior to the data mean.
  const DiagGmm ubm = SingleGaussian(Vector::Zero(2), Vector::Ones(2));
  Matrix enroll(10, 2);
  for (int i = 0; i < 10; ++i) {
    enroll(i, 0) = 4.0 + 0.01 * i;
    enroll(i, 1) = -2.0;
  }
  const DiagGmm adapted = MapAdapt(ubm, enroll, 10.0, 1);
  const Eigen::RowVectorXd data_mean = enroll.colwise().mean();
  CHECK(adapted.means(0, 0) == doctest::Approx(0.5 * data_mean(0)).epsilon(1e-12));
  CHECK(adapted.means(0, 1) == doctest::Approx(0.5 * data_mean(1)).epsilon(1e-12));
  // Weights and variances stay untouched under mean-only adaptation.
  CHECK((adapted.variances - ubm.variances).cwiseAbs().maxCoeff() == 0.0);
  CHECK((adapted.weights - ubm.weights).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("iterated map converges on fixed data") {
  Rng rng(57);
  Matrix pool(2000, 3);
  pool << GaussianBlob(1000, Vector::Constant(3, -1.5), 0.4, &rng),
      GaussianBlob(1000, Vector::Constant(3, 1.5), 0.4, &rng);
  UbmTrainOptions options;
  options.num_components = 4;
  options.em_iterations = 6;
  const DiagGmm ubm = UbmTrainEm(pool, options);
  const Matrix enroll = GaussianBlob(60, Vector::Constant(3, 1.0), 0.3, &rng);

  DiagGmm current = ubm;
  double previous_step = 1e300;
  for (int i = 0; i < 4; ++i) {
    const DiagGmm next = MapAdapt(current, enroll, 10.0, 1);
    const double step = (next.means - current.means).norm();
    CHECK(step <= previous_step + 1e-12);
    previous_step = step;
    current = next;
  }
}

TEST_CASE("llr of identical models is zero") {
  Rng rng(58);
  const DiagGmm ubm = SingleGaussian(Vector::Zero(3), Vector::Ones(3));
  const Matrix frames = GaussianBlob(50, Vector::Zero(3), 1.0, &rng);
  CHECK(LlrScore(ubm, ubm, frames) == 0.0);
}

TEST_CASE("llr is positive at the adapted mean and far from the ubm") {
  Rng rng(59);
  const DiagGmm ubm = SingleGaussian(Vector::Zero(3), Vector::Ones(3));
  DiagGmm target = ubm;
  target.means.row(0).setConstant(4.0);
  const Matrix frames = GaussianBlob(100, Vector::Constant(3, 4.0), 0.2, &rng);
  CHECK(LlrScore(target, ubm, frames) > 0.0);
}

TEST_CASE("llr is invariant to frame duplication and permutation") {
  Rng rng(60);
  const DiagGmm ubm = SingleGaussian(Vector::Zero(2), Vector::Ones(2));
  DiagGmm target = ubm;
  target.means.row(0) << 1.0, -0.5;
  const Matrix frames = GaussianBlob(17, Vector::Constant(2, 0.5), 1.0, &rng);
  const double base = LlrScore(target, ubm, frames);

  Matrix doubled(34, 2);
  doubled << frames, frames;
  CHECK(LlrScore(target, ubm, doubled) == doctest::Approx(base).epsilon(1e-12));

  Matrix reversed = frames.colwise().reverse();
  CHECK(LlrScore(target, ubm, reversed) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("frame log likelihood matches a scalar-gaussian oracle") {
  // One 1-D component: log p(x) = -0.5 (log(2 pi v) + (x-m)^2 / v).
  const DiagGmm gmm = SingleGaussian(Vector::Constant(1, 1.0), Vector::Constant(1, 4.0));
  Matrix frames(2, 1);
  frames << 1.0, 3.0;
  const Vector ll = GmmFrameLogLikelihoods(gmm, frames);
  const double log2pi = std::log(2.0 * M_PI);
  CHECK(ll(0) == doctest::Approx(-0.5 * (log2pi + std::log(4.0))).epsilon(1e-12));
  CHECK(ll(1) == doctest::Approx(-0.5 * (log2pi + std::log(4.0) + 1.0)).epsilon(1e-12));
}
