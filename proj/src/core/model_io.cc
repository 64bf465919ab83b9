// core/model_io.cc

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

#include "core/model_io.h"

#include <fstream>

namespace svbn {

namespace {
const uint32_t kFormatVersion = 1;

void WriteMatrix(std::ostream& os, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) io::WriteF64(os, m(i, j));
}

void ReadMatrix(std::istream& is, Matrix* m, const std::string& context) {
  for (Eigen::Index i = 0; i < m->rows(); ++i)
    for (Eigen::Index j = 0; j < m->cols(); ++j) (*m)(i, j) = io::ReadF64(is, context);
}

void WriteVector(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) io::WriteF64(os, v(i));
}

void ReadVector(std::istream& is, Vector* v, const std::string& context) {
  for (Eigen::Index i = 0; i < v->size(); ++i) (*v)(i) = io::ReadF64(is, context);
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Throw(Status::kIo, "cannot write model: " + path);
  return os;
}

std::ifstream OpenIn(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Throw(Status::kIo, "cannot open model: " + path);
  return is;
}

void CheckVersion(std::istream& is, const std::string& path) {
  const uint32_t version = io::ReadU32(is, path);
  if (version != kFormatVersion)
    Throw(Status::kFormat, path + ": unsupported format version " + std::to_string(version));
}
}  // namespace

void SaveNetworkModel(const std::string& path, const NetworkModel& model) {
  std::ofstream os = OpenOut(path);
  io::WriteMagic(os, "BNM1");
  io::WriteU32(os, kFormatVersion);
  io::WriteByte(os, static_cast<uint8_t>(model.type));
  if (model.type == NetworkModel::Type::kDense) {
    const auto& layers = model.dense.layers();
    io::WriteU32(os, static_cast<uint32_t>(model.dense.input_dim()));
    io::WriteU32(os, static_cast<uint32_t>(layers.size()));
    for (const auto& layer : layers) {
      io::WriteU32(os, static_cast<uint32_t>(layer.weights.rows()));
      io::WriteByte(os, static_cast<uint8_t>(layer.activation));
    }
    for (const auto& layer : layers) {
      WriteMatrix(os, layer.weights);
      WriteVector(os, layer.bias);
    }
  } else {
    io::WriteU32(os, static_cast<uint32_t>(model.gru.input_dim()));
    io::WriteU32(os, static_cast<uint32_t>(model.gru.hidden_dim()));
    io::WriteU32(os, static_cast<uint32_t>(model.gru.NumLayers()));
    io::WriteU32(os, static_cast<uint32_t>(model.gru.output_dim()));
    for (const auto& layer : model.gru.layers()) {
      WriteMatrix(os, layer.wz);
      WriteMatrix(os, layer.wr);
      WriteMatrix(os, layer.wh);
      WriteMatrix(os, layer.uz);
      WriteMatrix(os, layer.ur);
      WriteMatrix(os, layer.uh);
      WriteVector(os, layer.bz);
      WriteVector(os, layer.br);
      WriteVector(os, layer.bh);
    }
    WriteMatrix(os, model.gru.proj_w());
    WriteVector(os, model.gru.proj_b());
  }

  // Loss head.
  const LossHead& head = model.head;
  io::WriteByte(os, static_cast<uint8_t>(head.kind()));
  io::WriteU32(os, static_cast<uint32_t>(head.n_classes()));
  io::WriteU32(os, static_cast<uint32_t>(head.embed_dim()));
  const LossHyper& h = head.hyper();
  for (double value : {h.lambda, h.gamma, h.scale_s, h.margin_m, h.tau, h.triplet_margin,
                       h.center_alpha})
    io::WriteF64(os, value);
  io::WriteByte(os, head.weight().size() > 0 ? 1 : 0);
  if (head.weight().size() > 0) WriteMatrix(os, head.weight());
  io::WriteByte(os, head.bias().size() > 0 ? 1 : 0);
  if (head.bias().size() > 0) WriteVector(os, head.bias());
  io::WriteByte(os, head.centers().size() > 0 ? 1 : 0);
  if (head.centers().size() > 0) WriteMatrix(os, head.centers());
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

NetworkModel LoadNetworkModel(const std::string& path) {
  std::ifstream is = OpenIn(path);
  io::ExpectMagic(is, "BNM1", path);
  CheckVersion(is, path);
  NetworkModel model;
  model.type = static_cast<NetworkModel::Type>(io::ReadByte(is, path));
  if (model.type == NetworkModel::Type::kDense) {
    const uint32_t input_dim = io::ReadU32(is, path);
    const uint32_t n_layers = io::ReadU32(is, path);
    std::vector<int> widths(n_layers);
    std::vector<Activation> acts(n_layers);
    for (uint32_t l = 0; l < n_layers; ++l) {
      widths[l] = static_cast<int>(io::ReadU32(is, path));
      acts[l] = static_cast<Activation>(io::ReadByte(is, path));
    }
    model.dense = DenseNetwork(static_cast<int>(input_dim), widths,
                               n_layers > 0 ? acts[0] : Activation::kLinear);
    auto& layers = model.dense.mutable_layers();
    for (uint32_t l = 0; l < n_layers; ++l) {
      layers[l].activation = acts[l];
      ReadMatrix(is, &layers[l].weights, path);
      ReadVector(is, &layers[l].bias, path);
    }
  } else if (model.type == NetworkModel::Type::kGru) {
    const uint32_t input_dim = io::ReadU32(is, path);
    const uint32_t hidden = io::ReadU32(is, path);
    const uint32_t n_layers = io::ReadU32(is, path);
    const uint32_t output_dim = io::ReadU32(is, path);
    model.gru = GruEncoder(static_cast<int>(input_dim), static_cast<int>(hidden),
                           static_cast<int>(n_layers), static_cast<int>(output_dim));
    for (auto& layer : model.gru.mutable_layers()) {
      ReadMatrix(is, &layer.wz, path);
      ReadMatrix(is, &layer.wr, path);
      ReadMatrix(is, &layer.wh, path);
      ReadMatrix(is, &layer.uz, path);
      ReadMatrix(is, &layer.ur, path);
      ReadMatrix(is, &layer.uh, path);
      ReadVector(is, &layer.bz, path);
      ReadVector(is, &layer.br, path);
      ReadVector(is, &layer.bh, path);
    }
    ReadMatrix(is, &model.gru.mutable_proj_w(), path);
    ReadVector(is, &model.gru.mutable_proj_b(), path);
  } else {
    Throw(Status::kFormat, path + ": unknown network type byte");
  }

  const LossKind kind = static_cast<LossKind>(io::ReadByte(is, path));
  const uint32_t n_classes = io::ReadU32(is, path);
  const uint32_t embed_dim = io::ReadU32(is, path);
  LossHyper hyper;
  hyper.lambda = io::ReadF64(is, path);
  hyper.gamma = io::ReadF64(is, path);
  hyper.scale_s = io::ReadF64(is, path);
  hyper.margin_m = io::ReadF64(is, path);
  hyper.tau = io::ReadF64(is, path);
  hyper.triplet_margin = io::ReadF64(is, path);
  hyper.center_alpha = io::ReadF64(is, path);
  model.head = LossHead::Create(kind, static_cast<int>(n_classes),
                                static_cast<int>(embed_dim), hyper, nullptr);
  if (io::ReadByte(is, path)) {
    model.head.mutable_weight().resize(embed_dim, n_classes);
    ReadMatrix(is, &model.head.mutable_weight(), path);
  }
  if (io::ReadByte(is, path)) {
    model.head.mutable_bias().resize(n_classes);
    ReadVector(is, &model.head.mutable_bias(), path);
  }
  if (io::ReadByte(is, path)) {
    model.head.mutable_centers().resize(n_classes, embed_dim);
    ReadMatrix(is, &model.head.mutable_centers(), path);
  }
  return model;
}

void SavePcaModel(const std::string& path, const PcaModel& model) {
  std::ofstream os = OpenOut(path);
  io::WriteMagic(os, "BNP1");
  io::WriteU32(os, kFormatVersion);
  io::WriteU32(os, static_cast<uint32_t>(model.input_dim()));
  io::WriteU32(os, static_cast<uint32_t>(model.output_dim()));
  WriteVector(os, model.mean);
  WriteMatrix(os, model.projection);
  WriteVector(os, model.explained);
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

PcaModel LoadPcaModel(const std::string& path) {
  std::ifstream is = OpenIn(path);
  io::ExpectMagic(is, "BNP1", path);
  CheckVersion(is, path);
  const uint32_t d_in = io::ReadU32(is, path);
  const uint32_t k = io::ReadU32(is, path);
  PcaModel model;
  model.mean.resize(d_in);
  model.projection.resize(d_in, k);
  model.explained.resize(k);
  ReadVector(is, &model.mean, path);
  ReadMatrix(is, &model.projection, path);
  ReadVector(is, &model.explained, path);
  return model;
}

void SaveGmm(const std::string& path, const DiagGmm& gmm) {
  std::ofstream os = OpenOut(path);
  io::WriteMagic(os, "BNG1");
  io::WriteU32(os, kFormatVersion);
  io::WriteU32(os, static_cast<uint32_t>(gmm.NumComponents()));
  io::WriteU32(os, static_cast<uint32_t>(gmm.Dim()));
  WriteVector(os, gmm.weights);
  WriteMatrix(os, gmm.means);
  WriteMatrix(os, gmm.variances);
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

DiagGmm LoadGmm(const std::string& path) {
  std::ifstream is = OpenIn(path);
  io::ExpectMagic(is, "BNG1", path);
  CheckVersion(is, path);
  const uint32_t k = io::ReadU32(is, path);
  const uint32_t d = io::ReadU32(is, path);
  DiagGmm gmm;
  gmm.weights.resize(k);
  gmm.means.resize(k, d);
  gmm.variances.resize(k, d);
  ReadVector(is, &gmm.weights, path);
  ReadMatrix(is, &gmm.means, path);
  ReadMatrix(is, &gmm.variances, path);
  gmm.Check();
  return gmm;
}

void SaveTvModel(const std::string& path, const TvModel& tv) {
  std::ofstream os = OpenOut(path);
  io::WriteMagic(os, "BNT1");
  io::WriteU32(os, kFormatVersion);
  io::WriteU32(os, static_cast<uint32_t>(tv.NumComponents()));
  io::WriteU32(os, static_cast<uint32_t>(tv.Dim()));
  io::WriteU32(os, static_cast<uint32_t>(tv.Rank()));
  WriteMatrix(os, tv.t);
  WriteMatrix(os, tv.ubm_means);
  WriteMatrix(os, tv.ubm_vars);
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

TvModel LoadTvModel(const std::string& path) {
  std::ifstream is = OpenIn(path);
  io::ExpectMagic(is, "BNT1", path);
  CheckVersion(is, path);
  const uint32_t k = io::ReadU32(is, path);
  const uint32_t d = io::ReadU32(is, path);
  const uint32_t r = io::ReadU32(is, path);
  TvModel tv;
  tv.t.resize(static_cast<Eigen::Index>(k) * d, r);
  tv.ubm_means.resize(k, d);
  tv.ubm_vars.resize(k, d);
  ReadMatrix(is, &tv.t, path);
  ReadMatrix(is, &tv.ubm_means, path);
  ReadMatrix(is, &tv.ubm_vars, path);
  return tv;
}

void SavePldaModel(const std::string& path, const PldaModel& plda) {
  std::ofstream os = OpenOut(path);
  io::WriteMagic(os, "BNPL");
  io::WriteU32(os, kFormatVersion);
  io::WriteU32(os, static_cast<uint32_t>(plda.Dim()));
  io::WriteByte(os, plda.center.size() > 0 ? 1 : 0);
  if (plda.center.size() > 0) WriteVector(os, plda.center);
  WriteVector(os, plda.mean);
  WriteMatrix(os, plda.between);
  WriteMatrix(os, plda.within);
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

PldaModel LoadPldaModel(const std::string& path) {
  std::ifstream is = OpenIn(path);
  io::ExpectMagic(is, "BNPL", path);
  CheckVersion(is, path);
  const uint32_t r = io::ReadU32(is, path);
  PldaModel plda;
  if (io::ReadByte(is, path)) {
    plda.center.resize(r);
    ReadVector(is, &plda.center, path);
  }
  plda.mean.resize(r);
  plda.between.resize(r, r);
  plda.within.resize(r, r);
  ReadVector(is, &plda.mean, path);
  ReadMatrix(is, &plda.between, path);
  ReadMatrix(is, &plda.within, path);
  plda.Check();
  return plda;
}

}  // namespace svbn
