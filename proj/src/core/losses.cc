// core/losses.cc

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

#include "core/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svbn {

namespace {

void CheckLabels(const Matrix& batch, const std::vector<int>& labels, int n_classes,
                 const char* what) {
  if (static_cast<Eigen::Index>(labels.size()) != batch.rows())
    Throw(Status::kArg, std::string(what) + ": label count != batch size");
  for (int y : labels)
    if (y < 0 || y >= n_classes)
      Throw(Status::kArg, std::string(what) + ": label out of range");
}

// Row-wise softmax with the row loss -log p[label]; returns mean loss and
// writes softmax probabilities.
double SoftmaxCe(const Matrix& logits, const std::vector<int>& labels, Matrix* probs) {
  const Eigen::Index b = logits.rows();
  probs->resize(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double mx = logits.row(i).maxCoeff();
    const Eigen::ArrayXd shifted = logits.row(i).array() - mx;
    const Eigen::ArrayXd ex = shifted.exp();
    const double denom = ex.sum();
    probs->row(i) = (ex / denom).matrix();
    total += std::log(denom) - shifted(labels[i]);
  }
  return total / static_cast<double>(b);
}

Vector ColumnNorms(const Matrix& m, const char* what) {
  Vector norms(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    norms(j) = m.col(j).norm();
    if (norms(j) < 1e-12)
      Throw(Status::kNumeric, std::string(what) + ": zero-norm weight column " +
                                  std::to_string(j));
  }
  return norms;
}

Vector RowNorms(const Matrix& m, const char* what) {
  Vector norms(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    norms(i) = m.row(i).norm();
    if (norms(i) < 1e-12)
      Throw(Status::kNumeric, std::string(what) + ": zero-norm embedding in row " +
                                  std::to_string(i));
  }
  return norms;
}

}  // namespace

LossKind ParseLossKind(const std::string& name) {
  if (name == "ce") return LossKind::kCe;
  if (name == "focal") return LossKind::kFocal;
  if (name == "joint_center") return LossKind::kJointCenter;
  if (name == "msoftmax") return LossKind::kMsoftmax;
  if (name == "arcface") return LossKind::kArcface;
  if (name == "osl") return LossKind::kOsl;
  if (name == "triplet_cos") return LossKind::kTripletCos;
  if (name == "triplet_euc") return LossKind::kTripletEuc;
  if (name == "ntxent") return LossKind::kNtxent;
  if (name == "l1_apc") return LossKind::kL1Apc;
  Throw(Status::kConfig, "unknown loss kind: " + name);
}

std::string LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kCe: return "ce";
    case LossKind::kFocal: return "focal";
    case LossKind::kJointCenter: return "joint_center";
    case LossKind::kMsoftmax: return "msoftmax";
    case LossKind::kArcface: return "arcface";
    case LossKind::kOsl: return "osl";
    case LossKind::kTripletCos: return "triplet_cos";
    case LossKind::kTripletEuc: return "triplet_euc";
    case LossKind::kNtxent: return "ntxent";
    case LossKind::kL1Apc: return "l1_apc";
  }
  return "unknown";
}

bool LossUsesEmbedding(LossKind kind) {
  switch (kind) {
    case LossKind::kCe:
    case LossKind::kFocal:
    case LossKind::kL1Apc:
      return false;
    default:
      return true;
  }
}

void LossHyper::Validate(LossKind kind) const {
  if (kind == LossKind::kFocal && (gamma < 0.0 || gamma > 5.0))
    Throw(Status::kConfig, "focal: gamma must be in [0,5]");
  if (kind == LossKind::kArcface) {
    if (scale_s <= 0.0) Throw(Status::kConfig, "arcface: s must be positive");
    if (margin_m < 0.0 || margin_m >= M_PI)
      Throw(Status::kConfig, "arcface: m must be in [0, pi)");
  }
  if (kind == LossKind::kNtxent && tau <= 0.0)
    Throw(Status::kConfig, "ntxent: tau must be positive");
  if (kind == LossKind::kJointCenter && lambda < 0.0)
    Throw(Status::kConfig, "joint_center: lambda must be >= 0");
  if ((kind == LossKind::kTripletCos || kind == LossKind::kTripletEuc) &&
      triplet_margin < 0.0)
    Throw(Status::kConfig, "triplet: margin must be >= 0");
}

double LossCe(const Matrix& logits, const std::vector<int>& labels, Matrix* grad_logits) {
  CheckLabels(logits, labels, static_cast<int>(logits.cols()), "loss_ce");
  Matrix probs;
  const double loss = SoftmaxCe(logits, labels, &probs);
  if (grad_logits) {
    const double inv_b = 1.0 / static_cast<double>(logits.rows());
    *grad_logits = probs * inv_b;
    for (Eigen::Index i = 0; i < logits.rows(); ++i)
      (*grad_logits)(i, labels[i]) -= inv_b;
  }
  return loss;
}

double LossFocal(const Matrix& logits, const std::vector<int>& labels, double gamma,
                 Matrix* grad_logits) {
  if (gamma == 0.0) return LossCe(logits, labels, grad_logits);
  CheckLabels(logits, labels, static_cast<int>(logits.cols()), "loss_focal");
  Matrix probs;
  SoftmaxCe(logits, labels, &probs);
  const Eigen::Index b = logits.rows();
  const double inv_b = 1.0 / static_cast<double>(b);
  if (grad_logits) grad_logits->setZero(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double pt = probs(i, labels[i]);
    const double u = 1.0 - pt;
    const double log_pt = std::log(std::max(pt, 1e-300));
    total += -std::pow(std::max(u, 0.0), gamma) * log_pt;
    if (!grad_logits) continue;
    // d/dp_t of -(1-p_t)^g log p_t, then the softmax Jacobian.
    double coeff = 0.0;
    if (u > 1e-15)
      coeff = gamma * std::pow(u, gamma - 1.0) * log_pt - std::pow(u, gamma) / pt;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      const double indicator = (j == labels[i]) ? 1.0 : 0.0;
      (*grad_logits)(i, j) += inv_b * coeff * pt * (indicator - probs(i, j));
    }
  }
  return total * inv_b;
}

double LossJointCenter(const Matrix& embeddings, const Matrix& logits,
                       const std::vector<int>& labels, const Matrix& centers, double lambda,
                       Matrix* grad_embeddings, Matrix* grad_logits, Matrix* grad_centers) {
  if (centers.cols() != embeddings.cols())
    Throw(Status::kArg, "loss_joint_center: centers dim != embedding dim");
  CheckLabels(embeddings, labels, static_cast<int>(centers.rows()), "loss_joint_center");
  const double ce = LossCe(logits, labels, grad_logits);
  const Eigen::Index b = embeddings.rows();
  const double inv_b = 1.0 / static_cast<double>(b);
  if (grad_embeddings) grad_embeddings->setZero(embeddings.rows(), embeddings.cols());
  if (grad_centers) grad_centers->setZero(centers.rows(), centers.cols());
  double center_term = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const Eigen::RowVectorXd diff = embeddings.row(i) - centers.row(labels[i]);
    center_term += diff.squaredNorm();
    if (grad_embeddings) grad_embeddings->row(i) += lambda * inv_b * diff;
    if (grad_centers) grad_centers->row(labels[i]) -= lambda * inv_b * diff;
  }
  return ce + 0.5 * lambda * inv_b * center_term;
}

void UpdateCenters(const Matrix& embeddings, const std::vector<int>& labels, double alpha,
                   Matrix* centers) {
  CheckLabels(embeddings, labels, static_cast<int>(centers->rows()), "update_centers");
  const int n = static_cast<int>(centers->rows());
  std::vector<int> counts(n, 0);
  Matrix sums = Matrix::Zero(n, centers->cols());
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    sums.row(labels[i]) += embeddings.row(i);
    counts[labels[i]]++;
  }
  for (int j = 0; j < n; ++j) {
    if (counts[j] == 0) continue;
    const Eigen::RowVectorXd batch_mean = sums.row(j) / counts[j];
    centers->row(j) += alpha * (batch_mean - centers->row(j));
  }
}

double LossMsoftmax(const Matrix& embeddings, const std::vector<int>& labels,
                    const Matrix& weight, Matrix* grad_embeddings, Matrix* grad_weight) {
  CheckLabels(embeddings, labels, static_cast<int>(weight.cols()), "loss_msoftmax");
  if (weight.rows() != embeddings.cols())
    Throw(Status::kArg, "loss_msoftmax: weight rows != embedding dim");
  RowNorms(embeddings, "loss_msoftmax");
  const Vector w_norms = ColumnNorms(weight, "loss_msoftmax");
  Matrix w_unit = weight;
  for (Eigen::Index j = 0; j < weight.cols(); ++j) w_unit.col(j) /= w_norms(j);

  // ||z|| cos(theta_j) collapses to the unit-weight inner product.
  const Matrix logits = embeddings * w_unit;
  Matrix grad_logits;
  const double loss = LossCe(logits, labels, &grad_logits);
  if (grad_embeddings) *grad_embeddings = grad_logits * w_unit.transpose();
  if (grad_weight) {
    grad_weight->resize(weight.rows(), weight.cols());
    for (Eigen::Index j = 0; j < weight.cols(); ++j) {
      const Vector g_col = embeddings.transpose() * grad_logits.col(j);
      const double along = w_unit.col(j).dot(g_col);
      grad_weight->col(j) = (g_col - w_unit.col(j) * along) / w_norms(j);
    }
  }
  return loss;
}

double LossArcface(const Matrix& embeddings, const std::vector<int>& labels,
                   const Matrix& weight, double s, double m, Matrix* grad_embeddings,
                   Matrix* grad_weight) {
  CheckLabels(embeddings, labels, static_cast<int>(weight.cols()), "loss_arcface");
  if (weight.rows() != embeddings.cols())
    Throw(Status::kArg, "loss_arcface: weight rows != embedding dim");
  const Vector z_norms = RowNorms(embeddings, "loss_arcface");
  const Vector w_norms = ColumnNorms(weight, "loss_arcface");
  const Eigen::Index b = embeddings.rows();
  const Eigen::Index n = weight.cols();

  Matrix z_unit = embeddings;
  for (Eigen::Index i = 0; i < b; ++i) z_unit.row(i) /= z_norms(i);
  Matrix w_unit = weight;
  for (Eigen::Index j = 0; j < n; ++j) w_unit.col(j) /= w_norms(j);

  const double kCosClamp = 1.0 - 1e-7;
  Matrix cosines = z_unit * w_unit;
  Matrix logits(b, n);
  // d(logit)/d(cosine); zero where a clamp is active.
  Matrix dlogit_dcos(b, n);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double c = cosines(i, j);
      const bool clamped = c > kCosClamp || c < -kCosClamp;
      c = std::clamp(c, -kCosClamp, kCosClamp);
      cosines(i, j) = c;
      if (j == labels[i] && m != 0.0) {
        double theta = std::acos(c);
        const double theta_max = M_PI - m - 1e-6;
        if (theta > theta_max) {
          logits(i, j) = s * std::cos(theta_max + m);
          dlogit_dcos(i, j) = 0.0;
        } else {
          logits(i, j) = s * std::cos(theta + m);
          dlogit_dcos(i, j) = clamped ? 0.0 : s * std::sin(theta + m) / std::sin(theta);
        }
      } else {
        logits(i, j) = s * c;
        dlogit_dcos(i, j) = clamped ? 0.0 : s;
      }
    }
  }

  Matrix grad_logits;
  const double loss = LossCe(logits, labels, &grad_logits);
  if (!grad_embeddings && !grad_weight) return loss;

  const Matrix h = grad_logits.cwiseProduct(dlogit_dcos);  // d(loss)/d(cosine)
  if (grad_embeddings) {
    grad_embeddings->setZero(b, embeddings.cols());
    for (Eigen::Index i = 0; i < b; ++i) {
      Vector acc = Vector::Zero(embeddings.cols());
      double along = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        acc += h(i, j) * w_unit.col(j);
        along += h(i, j) * cosines(i, j);
      }
      grad_embeddings->row(i) =
          ((acc - along * z_unit.row(i).transpose()) / z_norms(i)).transpose();
    }
  }
  if (grad_weight) {
    grad_weight->setZero(weight.rows(), weight.cols());
    for (Eigen::Index j = 0; j < n; ++j) {
      Vector acc = Vector::Zero(weight.rows());
      double along = 0.0;
      for (Eigen::Index i = 0; i < b; ++i) {
        acc += h(i, j) * z_unit.row(i).transpose();
        along += h(i, j) * cosines(i, j);
      }
      grad_weight->col(j) = (acc - along * w_unit.col(j)) / w_norms(j);
    }
  }
  return loss;
}

Matrix MakeOslMask(int embed_dim, int n_classes) {
  if (n_classes < 1) Throw(Status::kConfig, "osl: need at least one class");
  const int block = embed_dim / n_classes;
  if (block < 1)
    Throw(Status::kConfig, "osl: embedding dim " + std::to_string(embed_dim) +
                               " cannot host " + std::to_string(n_classes) +
                               " orthogonal class blocks");
  Matrix mask = Matrix::Zero(embed_dim, n_classes);
  for (int j = 0; j < n_classes; ++j) {
    const int lo = j * block;
    const int hi = (j == n_classes - 1) ? embed_dim : (j + 1) * block;
    for (int i = lo; i < hi; ++i) mask(i, j) = 1.0;
  }
  return mask;
}

double LossOsl(const Matrix& embeddings, const std::vector<int>& labels, const Matrix& weight,
               const Matrix& mask, Matrix* grad_embeddings, Matrix* grad_weight) {
  CheckLabels(embeddings, labels, static_cast<int>(weight.cols()), "loss_osl");
  if (mask.rows() != weight.rows() || mask.cols() != weight.cols())
    Throw(Status::kArg, "loss_osl: mask shape != weight shape");
  const Matrix masked = mask.cwiseProduct(weight);
  const Matrix logits = embeddings * masked;
  Matrix grad_logits;
  const double loss = LossCe(logits, labels, &grad_logits);
  if (grad_embeddings) *grad_embeddings = grad_logits * masked.transpose();
  if (grad_weight) *grad_weight = (embeddings.transpose() * grad_logits).cwiseProduct(mask);
  return loss;
}

double LossTriplet(const Matrix& embeddings, const std::vector<int>& labels,
                   TripletMetric metric, double margin, Matrix* grad_embeddings,
                   int* warnings) {
  const Eigen::Index b = embeddings.rows();
  if (static_cast<Eigen::Index>(labels.size()) != b)
    Throw(Status::kArg, "loss_triplet: label count != batch size");
  if (warnings) *warnings = 0;
  if (grad_embeddings) grad_embeddings->setZero(b, embeddings.cols());

  Vector norms;
  Matrix z_unit;
  if (metric == TripletMetric::kCosine) {
    norms = RowNorms(embeddings, "loss_triplet");
    z_unit = embeddings;
    for (Eigen::Index i = 0; i < b; ++i) z_unit.row(i) /= norms(i);
  }

  Matrix dist(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    dist(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < b; ++j) {
      double d;
      if (metric == TripletMetric::kEuclidean) {
        d = (embeddings.row(i) - embeddings.row(j)).norm();
      } else {
        d = 1.0 - z_unit.row(i).dot(z_unit.row(j));
      }
      dist(i, j) = dist(j, i) = d;
    }
  }

  // Accumulates d(loss)/d(dist(a,b)) so the distance backward runs once.
  Matrix dist_grad = Matrix::Zero(b, b);
  double total = 0.0;
  int valid = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> active;  // (anchor, +1 pos / -1 neg) pairs
  std::vector<double> active_sign;
  for (Eigen::Index a = 0; a < b; ++a) {
    Eigen::Index hardest_pos = -1, hardest_neg = -1;
    for (Eigen::Index j = 0; j < b; ++j) {
      if (j == a) continue;
      if (labels[j] == labels[a]) {
        if (hardest_pos < 0 || dist(a, j) > dist(a, hardest_pos)) hardest_pos = j;
      } else {
        if (hardest_neg < 0 || dist(a, j) < dist(a, hardest_neg)) hardest_neg = j;
      }
    }
    if (hardest_pos < 0 || hardest_neg < 0) {
      if (warnings) ++(*warnings);
      continue;
    }
    ++valid;
    const double raw = dist(a, hardest_pos) - dist(a, hardest_neg) + margin;
    if (raw > 0.0) {
      total += raw;
      active.push_back({a, hardest_pos});
      active_sign.push_back(1.0);
      active.push_back({a, hardest_neg});
      active_sign.push_back(-1.0);
    }
  }
  if (valid == 0) return 0.0;
  const double inv_valid = 1.0 / static_cast<double>(valid);
  for (size_t k = 0; k < active.size(); ++k)
    dist_grad(active[k].first, active[k].second) += active_sign[k] * inv_valid;

  if (grad_embeddings) {
    for (Eigen::Index i = 0; i < b; ++i) {
      for (Eigen::Index j = 0; j < b; ++j) {
        const double g = dist_grad(i, j);
        if (g == 0.0) continue;
        if (metric == TripletMetric::kEuclidean) {
          const double d = dist(i, j);
          if (d < 1e-12) continue;  // tied points: zero subgradient
          const Eigen::RowVectorXd dir = (embeddings.row(i) - embeddings.row(j)) / d;
          grad_embeddings->row(i) += g * dir;
          grad_embeddings->row(j) -= g * dir;
        } else {
          const double cos_ij = z_unit.row(i).dot(z_unit.row(j));
          grad_embeddings->row(i) -=
              g * (z_unit.row(j) - cos_ij * z_unit.row(i)) / norms(i);
          grad_embeddings->row(j) -=
              g * (z_unit.row(i) - cos_ij * z_unit.row(j)) / norms(j);
        }
      }
    }
  }
  return total * inv_valid;
}

double LossNtxent(const Matrix& embeddings, const std::vector<int>& positive, double tau,
                  Matrix* grad_embeddings, int* warnings) {
  const Eigen::Index b = embeddings.rows();
  if (static_cast<Eigen::Index>(positive.size()) != b)
    Throw(Status::kArg, "loss_ntxent: positive index count != batch size");
  if (tau <= 0.0) Throw(Status::kConfig, "loss_ntxent: tau must be positive");
  if (warnings) *warnings = 0;
  const Vector norms = RowNorms(embeddings, "loss_ntxent");
  Matrix z_unit = embeddings;
  for (Eigen::Index i = 0; i < b; ++i) z_unit.row(i) /= norms(i);
  const Matrix sim = z_unit * z_unit.transpose();

  Matrix sim_grad = Matrix::Zero(b, b);
  double total = 0.0;
  int counted = 0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const int j = positive[i];
    if (j < 0) {
      if (warnings) ++(*warnings);
      continue;
    }
    if (j == static_cast<int>(i) || j >= b)
      Throw(Status::kArg, "loss_ntxent: bad positive index");
    ++counted;
    // log-sum-exp over k != i.
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < b; ++k)
      if (k != i) mx = std::max(mx, sim(i, k) / tau);
    double denom = 0.0;
    for (Eigen::Index k = 0; k < b; ++k)
      if (k != i) denom += std::exp(sim(i, k) / tau - mx);
    total += -sim(i, j) / tau + mx + std::log(denom);
    if (grad_embeddings) {
      sim_grad(i, j) -= 1.0 / tau;
      for (Eigen::Index k = 0; k < b; ++k) {
        if (k == i) continue;
        sim_grad(i, k) += std::exp(sim(i, k) / tau - mx) / denom / tau;
      }
    }
  }
  if (counted == 0) return 0.0;
  const double inv_counted = 1.0 / static_cast<double>(counted);
  if (grad_embeddings) {
    grad_embeddings->setZero(b, embeddings.cols());
    for (Eigen::Index i = 0; i < b; ++i) {
      for (Eigen::Index k = 0; k < b; ++k) {
        const double g = sim_grad(i, k) * inv_counted;
        if (g == 0.0) continue;
        grad_embeddings->row(i) += g * (z_unit.row(k) - sim(i, k) * z_unit.row(i)) / norms(i);
        grad_embeddings->row(k) += g * (z_unit.row(i) - sim(i, k) * z_unit.row(k)) / norms(k);
      }
    }
  }
  return total * inv_counted;
}

double LossL1Apc(const Matrix& predictions, const Matrix& targets, Matrix* grad_predictions) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
    Throw(Status::kArg, "loss_l1_apc: prediction/target shape mismatch");
  if (grad_predictions) grad_predictions->setZero(predictions.rows(), predictions.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < predictions.cols(); ++j) {
    for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
      const double diff = predictions(i, j) - targets(i, j);
      total += std::abs(diff);
      if (grad_predictions && diff != 0.0)
        (*grad_predictions)(i, j) = diff > 0.0 ? 1.0 : -1.0;
    }
  }
  return total;
}

LossHead LossHead::Create(LossKind kind, int n_classes, int embed_dim,
                          const LossHyper& hyper, Rng* rng) {
  hyper.Validate(kind);
  LossHead head;
  head.kind_ = kind;
  head.n_classes_ = n_classes;
  head.embed_dim_ = embed_dim;
  head.hyper_ = hyper;
  const bool needs_weight = kind == LossKind::kJointCenter || kind == LossKind::kMsoftmax ||
                            kind == LossKind::kArcface || kind == LossKind::kOsl;
  if (needs_weight) {
    if (n_classes < 1 || embed_dim < 1)
      Throw(Status::kConfig, "loss head: positive class count and embedding dim required");
    head.weight_.resize(embed_dim, n_classes);
    const double bound = std::sqrt(6.0 / (embed_dim + n_classes));
    for (Eigen::Index j = 0; j < head.weight_.cols(); ++j)
      for (Eigen::Index i = 0; i < head.weight_.rows(); ++i)
        head.weight_(i, j) = rng ? rng->Uniform(-bound, bound) : 0.0;
  }
  if (kind == LossKind::kJointCenter) {
    head.bias_ = Vector::Zero(n_classes);
    head.centers_ = Matrix::Zero(n_classes, embed_dim);
  }
  if (kind == LossKind::kOsl) head.RebuildOslMask();
  return head;
}

void LossHead::RebuildOslMask() { osl_mask_ = MakeOslMask(embed_dim_, n_classes_); }

LossHead::Result LossHead::Evaluate(const Matrix& output, const std::vector<int>& labels,
                                    const Matrix* targets, const std::vector<int>* positive) {
  Result result;
  switch (kind_) {
    case LossKind::kCe:
      result.value = LossCe(output, labels, &result.grad_output);
      break;
    case LossKind::kFocal:
      result.value = LossFocal(output, labels, hyper_.gamma, &result.grad_output);
      break;
    case LossKind::kJointCenter: {
      Matrix logits = output * weight_;
      logits.rowwise() += bias_.transpose();
      Matrix grad_logits;
      result.value = LossJointCenter(output, logits, labels, centers_, hyper_.lambda,
                                     &result.grad_output, &grad_logits, &grad_centers_);
      result.grad_output += grad_logits * weight_.transpose();
      grad_weight_ = output.transpose() * grad_logits;
      grad_bias_ = grad_logits.colwise().sum().transpose();
      break;
    }
    case LossKind::kMsoftmax:
      result.value = LossMsoftmax(output, labels, weight_, &result.grad_output, &grad_weight_);
      break;
    case LossKind::kArcface:
      result.value = LossArcface(output, labels, weight_, hyper_.scale_s, hyper_.margin_m,
                                 &result.grad_output, &grad_weight_);
      break;
    case LossKind::kOsl:
      result.value =
          LossOsl(output, labels, weight_, osl_mask_, &result.grad_output, &grad_weight_);
      break;
    case LossKind::kTripletCos:
      result.value = LossTriplet(output, labels, TripletMetric::kCosine,
                                 hyper_.triplet_margin, &result.grad_output, &result.warnings);
      break;
    case LossKind::kTripletEuc:
      result.value = LossTriplet(output, labels, TripletMetric::kEuclidean,
                                 hyper_.triplet_margin, &result.grad_output, &result.warnings);
      break;
    case LossKind::kNtxent:
      if (!positive) Throw(Status::kArg, "ntxent: positive pairing required");
      result.value =
          LossNtxent(output, *positive, hyper_.tau, &result.grad_output, &result.warnings);
      break;
    case LossKind::kL1Apc:
      if (!targets) Throw(Status::kArg, "l1_apc: targets required");
      result.value = LossL1Apc(output, *targets, &result.grad_output);
      break;
  }
  if (result.grad_output.size() == 0)
    result.grad_output = Matrix::Zero(output.rows(), output.cols());
  return result;
}

void LossHead::PostStep(const Matrix& output, const std::vector<int>& labels) {
  if (kind_ == LossKind::kJointCenter)
    UpdateCenters(output, labels, hyper_.center_alpha, &centers_);
}

std::vector<ParamRef> LossHead::Params() {
  std::vector<ParamRef> refs;
  if (weight_.size() > 0) refs.push_back({weight_.data(), weight_.size(), "head.W"});
  if (bias_.size() > 0) refs.push_back({bias_.data(), bias_.size(), "head.b"});
  if (centers_.size() > 0) refs.push_back({centers_.data(), centers_.size(), "head.centers"});
  return refs;
}

std::vector<ParamRef> LossHead::GradRefs() {
  std::vector<ParamRef> refs;
  if (weight_.size() > 0) {
    if (grad_weight_.size() != weight_.size())
      grad_weight_ = Matrix::Zero(weight_.rows(), weight_.cols());
    refs.push_back({grad_weight_.data(), grad_weight_.size(), "head.W"});
  }
  if (bias_.size() > 0) {
    if (grad_bias_.size() != bias_.size()) grad_bias_ = Vector::Zero(bias_.size());
    refs.push_back({grad_bias_.data(), grad_bias_.size(), "head.b"});
  }
  if (centers_.size() > 0) {
    if (grad_centers_.size() != centers_.size())
      grad_centers_ = Matrix::Zero(centers_.rows(), centers_.cols());
    refs.push_back({grad_centers_.data(), grad_centers_.size(), "head.centers"});
  }
  return refs;
}

}  // namespace svbn
