// core/gru.cc

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

#include "core/gru.h"

#include <cmath>

namespace svbn {

namespace {
inline Vector SigmoidVec(const Vector& v) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v(i);
    out(i) = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return out;
}

void InitUniform(Matrix* m, Rng* rng) {
  const double bound = std::sqrt(6.0 / (m->rows() + m->cols()));
  for (Eigen::Index j = 0; j < m->cols(); ++j)
    for (Eigen::Index i = 0; i < m->rows(); ++i) (*m)(i, j) = rng->Uniform(-bound, bound);
}
}  // namespace

GruEncoder::GruEncoder(int input_dim, int hidden_dim, int num_layers, int output_dim)
    : input_dim_(input_dim), hidden_dim_(hidden_dim), output_dim_(output_dim) {
  if (input_dim < 1 || hidden_dim < 1 || num_layers < 1 || output_dim < 1)
    Throw(Status::kConfig, "GruEncoder: all dimensions must be positive");
  for (int l = 0; l < num_layers; ++l) {
    const int in = (l == 0) ? input_dim : hidden_dim;
    GruLayer layer;
    layer.wz = Matrix::Zero(hidden_dim, in);
    layer.wr = Matrix::Zero(hidden_dim, in);
    layer.wh = Matrix::Zero(hidden_dim, in);
    layer.uz = Matrix::Zero(hidden_dim, hidden_dim);
    layer.ur = Matrix::Zero(hidden_dim, hidden_dim);
    layer.uh = Matrix::Zero(hidden_dim, hidden_dim);
    layer.bz = Vector::Zero(hidden_dim);
    layer.br = Vector::Zero(hidden_dim);
    layer.bh = Vector::Zero(hidden_dim);
    layers_.push_back(std::move(layer));
  }
  proj_w_ = Matrix::Zero(output_dim, hidden_dim);
  proj_b_ = Vector::Zero(output_dim);
}

void GruEncoder::Initialize(Rng* rng) {
  for (auto& layer : layers_) {
    InitUniform(&layer.wz, rng);
    InitUniform(&layer.wr, rng);
    InitUniform(&layer.wh, rng);
    InitUniform(&layer.uz, rng);
    InitUniform(&layer.ur, rng);
    InitUniform(&layer.uh, rng);
    layer.bz.setZero();
    layer.br.setZero();
    layer.bh.setZero();
  }
  InitUniform(&proj_w_, rng);
  proj_b_.setZero();
}

Matrix GruEncoder::Forward(const Matrix& sequence, GruCache* cache) const {
  if (sequence.cols() != input_dim_)
    Throw(Status::kArg, "GruEncoder::Forward: input width mismatch");
  const int t_len = static_cast<int>(sequence.rows());
  if (t_len < 1) Throw(Status::kArg, "GruEncoder::Forward: empty sequence");

  if (cache) {
    cache->input = sequence;
    const size_t n = layers_.size();
    cache->z.assign(n, Matrix(t_len, hidden_dim_));
    cache->r.assign(n, Matrix(t_len, hidden_dim_));
    cache->c.assign(n, Matrix(t_len, hidden_dim_));
    cache->h.assign(n, Matrix(t_len, hidden_dim_));
  }

  Matrix layer_in = sequence;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const GruLayer& layer = layers_[l];
    Matrix layer_out(t_len, hidden_dim_);
    Vector h_prev = Vector::Zero(hidden_dim_);
    for (int t = 0; t < t_len; ++t) {
      const Vector x = layer_in.row(t).transpose();
      const Vector z = SigmoidVec(layer.wz * x + layer.uz * h_prev + layer.bz);
      const Vector r = SigmoidVec(layer.wr * x + layer.ur * h_prev + layer.br);
      const Vector c =
          (layer.wh * x + layer.uh * (r.cwiseProduct(h_prev)) + layer.bh).array().tanh();
      const Vector h =
          (Vector::Ones(hidden_dim_) - z).cwiseProduct(h_prev) + z.cwiseProduct(c);
      if (cache) {
        cache->z[l].row(t) = z.transpose();
        cache->r[l].row(t) = r.transpose();
        cache->c[l].row(t) = c.transpose();
        cache->h[l].row(t) = h.transpose();
      }
      layer_out.row(t) = h.transpose();
      h_prev = h;
    }
    layer_in = std::move(layer_out);
  }

  Matrix output = layer_in * proj_w_.transpose();
  output.rowwise() += proj_b_.transpose();
  if (cache) cache->output = output;
  return output;
}

GruGradients GruEncoder::Backward(const GruCache& cache, const Matrix& output_grad) const {
  const int t_len = static_cast<int>(cache.input.rows());
  GruGradients grads = ZeroGradients();

  // Projection layer.
  const Matrix& h_top = cache.h.back();
  grads.proj_w = output_grad.transpose() * h_top;
  grads.proj_b = output_grad.colwise().sum().transpose();

  // Gradient w.r.t. the current layer's hidden-state sequence.
  Matrix dh_seq = output_grad * proj_w_;

  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    const GruLayer& layer = layers_[l];
    GruLayerGradients& g = grads.layers[l];
    const Matrix& below = (l == 0) ? cache.input : cache.h[l - 1];
    Matrix dx_seq = Matrix::Zero(below.rows(), below.cols());
    Vector dh_carry = Vector::Zero(hidden_dim_);

    for (int t = t_len - 1; t >= 0; --t) {
      const Vector z = cache.z[l].row(t).transpose();
      const Vector r = cache.r[l].row(t).transpose();
      const Vector c = cache.c[l].row(t).transpose();
      const Vector h_prev =
          t > 0 ? Vector(cache.h[l].row(t - 1).transpose()) : Vector(Vector::Zero(hidden_dim_));
      const Vector x = below.row(t).transpose();

      const Vector dh = dh_seq.row(t).transpose() + dh_carry;
      const Vector dz = dh.cwiseProduct(c - h_prev);
      const Vector dc = dh.cwiseProduct(z);
      Vector dh_prev = dh.cwiseProduct(Vector::Ones(hidden_dim_) - z);

      const Vector dac = dc.cwiseProduct(Vector::Ones(hidden_dim_) - c.cwiseProduct(c));
      g.wh += dac * x.transpose();
      g.uh += dac * (r.cwiseProduct(h_prev)).transpose();
      g.bh += dac;
      const Vector uh_dac = layer.uh.transpose() * dac;
      const Vector dr = uh_dac.cwiseProduct(h_prev);
      dh_prev += uh_dac.cwiseProduct(r);

      const Vector daz = dz.cwiseProduct(z.cwiseProduct(Vector::Ones(hidden_dim_) - z));
      const Vector dar = dr.cwiseProduct(r.cwiseProduct(Vector::Ones(hidden_dim_) - r));
      g.wz += daz * x.transpose();
      g.uz += daz * h_prev.transpose();
      g.bz += daz;
      g.wr += dar * x.transpose();
      g.ur += dar * h_prev.transpose();
      g.br += dar;

      dx_seq.row(t) = (layer.wz.transpose() * daz + layer.wr.transpose() * dar +
                       layer.wh.transpose() * dac)
                          .transpose();
      dh_carry = dh_prev + layer.uz.transpose() * daz + layer.ur.transpose() * dar;
    }
    dh_seq = std::move(dx_seq);
  }
  return grads;
}

Matrix GruEncoder::TapHidden(int layer_index, const Matrix& sequence) const {
  if (layer_index < 1 || layer_index > NumLayers())
    Throw(Status::kArg, "tap_hidden: GRU layer index out of range");
  GruCache cache;
  Forward(sequence, &cache);
  return cache.h[layer_index - 1];
}

GruGradients GruEncoder::ZeroGradients() const {
  GruGradients grads;
  for (const auto& layer : layers_) {
    GruLayerGradients g;
    g.wz = Matrix::Zero(layer.wz.rows(), layer.wz.cols());
    g.wr = Matrix::Zero(layer.wr.rows(), layer.wr.cols());
    g.wh = Matrix::Zero(layer.wh.rows(), layer.wh.cols());
    g.uz = Matrix::Zero(layer.uz.rows(), layer.uz.cols());
    g.ur = Matrix::Zero(layer.ur.rows(), layer.ur.cols());
    g.uh = Matrix::Zero(layer.uh.rows(), layer.uh.cols());
    g.bz = Vector::Zero(layer.bz.size());
    g.br = Vector::Zero(layer.br.size());
    g.bh = Vector::Zero(layer.bh.size());
    grads.layers.push_back(std::move(g));
  }
  grads.proj_w = Matrix::Zero(proj_w_.rows(), proj_w_.cols());
  grads.proj_b = Vector::Zero(proj_b_.size());
  return grads;
}

namespace {
template <typename LayerLike>
void CollectGruRefs(LayerLike& layer, int index, std::vector<ParamRef>* refs) {
  const std::string p = "gru" + std::to_string(index + 1) + ".";
  refs->push_back({layer.wz.data(), layer.wz.size(), p + "Wz"});
  refs->push_back({layer.wr.data(), layer.wr.size(), p + "Wr"});
  refs->push_back({layer.wh.data(), layer.wh.size(), p + "Wh"});
  refs->push_back({layer.uz.data(), layer.uz.size(), p + "Uz"});
  refs->push_back({layer.ur.data(), layer.ur.size(), p + "Ur"});
  refs->push_back({layer.uh.data(), layer.uh.size(), p + "Uh"});
  refs->push_back({layer.bz.data(), layer.bz.size(), p + "bz"});
  refs->push_back({layer.br.data(), layer.br.size(), p + "br"});
  refs->push_back({layer.bh.data(), layer.bh.size(), p + "bh"});
}
}  // namespace

std::vector<ParamRef> GruEncoder::Params() {
  std::vector<ParamRef> refs;
  for (size_t l = 0; l < layers_.size(); ++l)
    CollectGruRefs(layers_[l], static_cast<int>(l), &refs);
  refs.push_back({proj_w_.data(), proj_w_.size(), "proj.W"});
  refs.push_back({proj_b_.data(), proj_b_.size(), "proj.b"});
  return refs;
}

std::vector<ParamRef> GruEncoder::GradRefs(GruGradients* grads) {
  std::vector<ParamRef> refs;
  for (size_t l = 0; l < grads->layers.size(); ++l)
    CollectGruRefs(grads->layers[l], static_cast<int>(l), &refs);
  refs.push_back({grads->proj_w.data(), grads->proj_w.size(), "proj.W"});
  refs.push_back({grads->proj_b.data(), grads->proj_b.size(), "proj.b"});
  return refs;
}

Eigen::Index GruEncoder::NumParams() const {
  Eigen::Index n = proj_w_.size() + proj_b_.size();
  for (const auto& l : layers_) {
    n += l.wz.size() + l.wr.size() + l.wh.size();
    n += l.uz.size() + l.ur.size() + l.uh.size();
    n += l.bz.size() + l.br.size() + l.bh.size();
  }
  return n;
}

}  // namespace svbn
