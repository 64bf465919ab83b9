// core/plda.cc

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

#include "core/plda.h"

#include <cmath>
#include <map>

namespace svbn {

namespace {
const double kLog2Pi = 1.8378770664093454836;

Matrix Symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Eigenvalue floor keeps the covariances PSD and invertible.
Matrix FloorPsd(const Matrix& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(Symmetrize(m));
  Vector vals = solver.eigenvalues().cwiseMax(floor);
  return solver.eigenvectors() * vals.asDiagonal() * solver.eigenvectors().transpose();
}

double LogDetPsd(const Matrix& m) {
  Eigen::LDLT<Matrix> ldlt(m);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    logdet += std::log(std::max(ldlt.vectorD()(i), 1e-300));
  return logdet;
}

struct ClassStats {
  int count = 0;
  Vector sum;
  Matrix scatter;  // sum of x x' over the class (centered by mu)
};
}  // namespace

void PldaModel::Check() const {
  const int r = Dim();
  if (between.rows() != r || between.cols() != r || within.rows() != r ||
      within.cols() != r)
    Throw(Status::kFormat, "PldaModel: inconsistent dims");
  for (const Matrix* m : {&between, &within}) {
    if (((*m) - m->transpose()).cwiseAbs().maxCoeff() > 1e-9)
      Throw(Status::kNumeric, "PldaModel: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(*m);
    if (solver.eigenvalues().minCoeff() < -1e-9)
      Throw(Status::kNumeric, "PldaModel: covariance not positive semi-definite");
  }
}

Vector PldaModel::Preprocess(const Vector& raw) const {
  if (center.size() == 0) return LengthNormalize(raw);
  if (center.size() != raw.size())
    Throw(Status::kArg, "plda: i-vector dim does not match centering vector");
  return LengthNormalize(raw - center);
}

PldaModel PldaTrain(const std::vector<Vector>& ivectors, const std::vector<int>& labels,
                    int iterations, EmTrace* trace, int* singleton_classes) {
  if (ivectors.size() != labels.size())
    Throw(Status::kArg, "plda_train: label count mismatch");
  if (ivectors.empty()) Throw(Status::kArg, "plda_train: no training vectors");
  const int r = static_cast<int>(ivectors.front().size());
  const double n_total = static_cast<double>(ivectors.size());

  PldaModel model;
  model.mean = Vector::Zero(r);
  for (const auto& v : ivectors) model.mean += v;
  model.mean /= n_total;

  std::map<int, ClassStats> classes;
  Matrix total_scatter = Matrix::Zero(r, r);
  for (size_t i = 0; i < ivectors.size(); ++i) {
    const Vector x = ivectors[i] - model.mean;
    auto& cs = classes[labels[i]];
    if (cs.count == 0) {
      cs.sum = Vector::Zero(r);
      cs.scatter = Matrix::Zero(r, r);
    }
    cs.count++;
    cs.sum += x;
    cs.scatter += x * x.transpose();
    total_scatter += x * x.transpose();
  }
  const int n_classes = static_cast<int>(classes.size());
  if (n_classes < 2) Throw(Status::kArg, "plda_train: need at least 2 classes");
  if (singleton_classes) {
    *singleton_classes = 0;
    for (const auto& [label, cs] : classes)
      if (cs.count == 1) ++(*singleton_classes);
  }

  // Moment-based init: between = scatter of class means, within = remainder.
  Matrix between_init = Matrix::Zero(r, r);
  for (const auto& [label, cs] : classes) {
    const Vector m = cs.sum / cs.count;
    between_init += m * m.transpose();
  }
  between_init /= static_cast<double>(n_classes);
  model.between = FloorPsd(between_init, 1e-10);
  Matrix within_init = total_scatter / n_total - between_init;
  model.within = FloorPsd(within_init, 1e-10);

  for (int iter = 0; iter < iterations; ++iter) {
    if (trace) trace->objectives.push_back(PldaLogLikelihood(model, ivectors, labels));

    Eigen::LDLT<Matrix> b_ldlt(model.between);
    Eigen::LDLT<Matrix> w_ldlt(model.within);
    Matrix b_acc = Matrix::Zero(r, r);
    Matrix w_acc = total_scatter;
    for (const auto& [label, cs] : classes) {
      // Posterior of the class variable y: precision B^-1 + n W^-1.
      Matrix precision = b_ldlt.solve(Matrix::Identity(r, r)) +
                         cs.count * w_ldlt.solve(Matrix::Identity(r, r));
      Eigen::LDLT<Matrix> p_ldlt(Symmetrize(precision));
      const Matrix cov = p_ldlt.solve(Matrix::Identity(r, r));
      const Vector y_hat = p_ldlt.solve(w_ldlt.solve(cs.sum));
      const Matrix second = cov + y_hat * y_hat.transpose();
      b_acc += second;
      w_acc += cs.count * second - y_hat * cs.sum.transpose() - cs.sum * y_hat.transpose();
    }
    model.between = FloorPsd(b_acc / static_cast<double>(n_classes), 1e-10);
    model.within = FloorPsd(w_acc / n_total, 1e-10);
  }
  if (trace) trace->objectives.push_back(PldaLogLikelihood(model, ivectors, labels));
  model.Check();
  return model;
}

double PldaLogLikelihood(const PldaModel& model, const std::vector<Vector>& ivectors,
                         const std::vector<int>& labels) {
  const int r = model.Dim();
  std::map<int, std::vector<const Vector*>> classes;
  for (size_t i = 0; i < ivectors.size(); ++i) classes[labels[i]].push_back(&ivectors[i]);

  Eigen::LDLT<Matrix> w_ldlt(model.within);
  const double logdet_w = LogDetPsd(model.within);
  double total = 0.0;
  for (const auto& [label, members] : classes) {
    const int n = static_cast<int>(members.size());
    Vector mean = Vector::Zero(r);
    for (const Vector* x : members) mean += *x - model.mean;
    mean /= static_cast<double>(n);
    double tr_dev = 0.0;
    for (const Vector* x : members) {
      const Vector d = (*x - model.mean) - mean;
      tr_dev += d.dot(w_ldlt.solve(d));
    }
    const Matrix mean_cov = model.between + model.within / static_cast<double>(n);
    Eigen::LDLT<Matrix> m_ldlt(mean_cov);
    // Deviations part, Gaussian-integral constant, and class-mean part.
    total += -0.5 * (n * r * kLog2Pi + n * logdet_w + tr_dev);
    total += 0.5 * (r * kLog2Pi + logdet_w - r * std::log(static_cast<double>(n)));
    total += -0.5 * (r * kLog2Pi + LogDetPsd(mean_cov) + mean.dot(m_ldlt.solve(mean)));
  }
  return total;
}

double PldaScore(const PldaModel& model, const Vector& enroll, const Vector& test) {
  return PldaScorer(model).Score(enroll, test);
}

PldaScorer::PldaScorer(const PldaModel& model) : mean_(model.mean) {
  const int r = model.Dim();
  Matrix across = model.between + model.within;
  Matrix same(2 * r, 2 * r), diff(2 * r, 2 * r);
  same << across, model.between, model.between, across;
  diff << across, Matrix::Zero(r, r), Matrix::Zero(r, r), across;
  Eigen::LDLT<Matrix> same_ldlt(same), diff_ldlt(diff);
  inv_same_ = same_ldlt.solve(Matrix::Identity(2 * r, 2 * r));
  inv_diff_ = diff_ldlt.solve(Matrix::Identity(2 * r, 2 * r));
  logdet_same_ = LogDetPsd(same);
  logdet_diff_ = LogDetPsd(diff);
}

double PldaScorer::Score(const Vector& enroll, const Vector& test) const {
  const Eigen::Index r = mean_.size();
  if (enroll.size() != r || test.size() != r)
    Throw(Status::kArg, "plda_score: dimension mismatch");
  Vector v(2 * r);
  v << enroll - mean_, test - mean_;
  const double log_same = -0.5 * (logdet_same_ + v.dot(inv_same_ * v));
  const double log_diff = -0.5 * (logdet_diff_ + v.dot(inv_diff_ * v));
  return log_same - log_diff;
}

}  // namespace svbn
