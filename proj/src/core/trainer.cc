// core/trainer.cc

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

#include "core/trainer.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "core/gradcheck.h"
#include "core/pca.h"
#include "core/targets.h"

namespace svbn {

namespace {

struct Batch {
  Matrix inputs;
  std::vector<int> labels;
  std::vector<int> positive;  // ntxent pairing; empty otherwise
};

// Uniform seeded shuffle split into batch_size chunks.
std::vector<std::vector<uint32_t>> PlainBatches(size_t n, int batch_size, Rng* rng) {
  std::vector<uint32_t> order = rng->Permutation(static_cast<uint32_t>(n));
  std::vector<std::vector<uint32_t>> batches;
  for (size_t at = 0; at < order.size(); at += batch_size) {
    const size_t hi = std::min(order.size(), at + batch_size);
    batches.emplace_back(order.begin() + at, order.begin() + hi);
  }
  return batches;
}

// classes_per_batch classes x samples_per_class samples, so every batch has
// positives and negatives for the metric losses.
std::vector<std::vector<uint32_t>> ClassStructuredBatches(const std::vector<int>& labels,
                                                          int classes_per_batch,
                                                          int samples_per_class, Rng* rng) {
  std::map<int, std::vector<uint32_t>> by_class;
  for (size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i]].push_back(static_cast<uint32_t>(i));
  std::vector<std::vector<uint32_t>> pools;
  for (auto& [label, members] : by_class) {
    std::vector<uint32_t> perm = rng->Permutation(static_cast<uint32_t>(members.size()));
    std::vector<uint32_t> shuffled(members.size());
    for (size_t i = 0; i < members.size(); ++i) shuffled[i] = members[perm[i]];
    pools.push_back(std::move(shuffled));
  }
  std::vector<uint32_t> class_order = rng->Permutation(static_cast<uint32_t>(pools.size()));

  std::vector<std::vector<uint32_t>> batches;
  size_t cursor = 0;
  while (true) {
    std::vector<uint32_t> batch;
    int classes_used = 0;
    size_t scanned = 0;
    while (classes_used < classes_per_batch && scanned < pools.size()) {
      auto& pool = pools[class_order[cursor % pools.size()]];
      ++cursor;
      ++scanned;
      if (pool.empty()) continue;
      const int take = std::min<int>(samples_per_class, static_cast<int>(pool.size()));
      for (int k = 0; k < take; ++k) {
        batch.push_back(pool.back());
        pool.pop_back();
      }
      ++classes_used;
    }
    if (classes_used < 2) break;  // no batch with both positives and negatives left
    batches.push_back(std::move(batch));
  }
  return batches;
}

Batch GatherBatch(const Matrix& inputs, const std::vector<int>& labels,
                  const std::vector<uint32_t>& index, bool want_pairs) {
  Batch batch;
  batch.inputs.resize(index.size(), inputs.cols());
  batch.labels.resize(index.size());
  for (size_t i = 0; i < index.size(); ++i) {
    batch.inputs.row(i) = inputs.row(index[i]);
    batch.labels[i] = labels[index[i]];
  }
  if (want_pairs) {
    // Consecutive same-class samples pair up; a leftover is excluded.
    batch.positive.assign(index.size(), -1);
    size_t i = 0;
    while (i < index.size()) {
      size_t j = i + 1;
      if (j < index.size() && batch.labels[j] == batch.labels[i]) {
        batch.positive[i] = static_cast<int>(j);
        batch.positive[j] = static_cast<int>(i);
        i += 2;
      } else {
        i += 1;
      }
    }
  }
  return batch;
}

void AddGruL2(const GruEncoder& gru, double l2, GruGradients* grads) {
  if (l2 == 0.0) return;
  for (int l = 0; l < gru.NumLayers(); ++l) {
    const GruLayer& layer = gru.layers()[l];
    GruLayerGradients& g = grads->layers[l];
    g.wz += l2 * layer.wz;
    g.wr += l2 * layer.wr;
    g.wh += l2 * layer.wh;
    g.uz += l2 * layer.uz;
    g.ur += l2 * layer.ur;
    g.uh += l2 * layer.uh;
  }
  grads->proj_w += l2 * gru.proj_w();
}

void AccumulateGru(const GruGradients& from, GruGradients* into) {
  for (size_t l = 0; l < from.layers.size(); ++l) {
    into->layers[l].wz += from.layers[l].wz;
    into->layers[l].wr += from.layers[l].wr;
    into->layers[l].wh += from.layers[l].wh;
    into->layers[l].uz += from.layers[l].uz;
    into->layers[l].ur += from.layers[l].ur;
    into->layers[l].uh += from.layers[l].uh;
    into->layers[l].bz += from.layers[l].bz;
    into->layers[l].br += from.layers[l].br;
    into->layers[l].bh += from.layers[l].bh;
  }
  into->proj_w += from.proj_w;
  into->proj_b += from.proj_b;
}

}  // namespace

NetworkModel TrainDenseModel(const Matrix& inputs, const std::vector<int>& labels,
                             const DenseTrainOptions& options, TrainTrace* trace) {
  options.train.Validate();
  options.hyper.Validate(options.loss);
  if (inputs.rows() < 1) Throw(Status::kArg, "train: empty input");
  if (static_cast<size_t>(inputs.rows()) != labels.size())
    Throw(Status::kArg, "train: label count mismatch");

  const bool embedding = LossUsesEmbedding(options.loss);
  const int out_dim = embedding ? options.embedding_dim : options.n_classes;
  if (out_dim < 1) Throw(Status::kConfig, "train: output dimension must be positive");

  std::vector<int> widths = options.hidden_widths;
  widths.push_back(out_dim);

  Rng rng(options.train.seed);
  NetworkModel model;
  model.type = NetworkModel::Type::kDense;
  model.dense =
      DenseNetwork(static_cast<int>(inputs.cols()), widths, options.activation);
  model.dense.Initialize(&rng);
  model.head = LossHead::Create(options.loss, options.n_classes,
                                embedding ? options.embedding_dim : 0, options.hyper, &rng);

  Optimizer optimizer(options.train.optimizer, options.train.learning_rate);
  const bool structured =
      options.loss == LossKind::kTripletCos || options.loss == LossKind::kTripletEuc ||
      options.loss == LossKind::kNtxent;
  const bool want_pairs = options.loss == LossKind::kNtxent;

  for (int epoch = 0; epoch < options.train.epochs; ++epoch) {
    std::vector<std::vector<uint32_t>> batches =
        structured ? ClassStructuredBatches(labels, options.classes_per_batch,
                                            options.samples_per_class, &rng)
                   : PlainBatches(labels.size(), options.train.batch_size, &rng);
    double epoch_loss = 0.0;
    size_t batch_count = 0;
    for (const auto& index : batches) {
      Batch batch = GatherBatch(inputs, labels, index, want_pairs);
      ForwardCache cache;
      const Matrix out = model.dense.Forward(batch.inputs, &cache);
      LossHead::Result res =
          model.head.Evaluate(out, batch.labels, nullptr,
                              want_pairs ? &batch.positive : nullptr);
      DenseGradients grads =
          model.dense.Backward(cache, res.grad_output, options.train.l2_penalty);

      std::vector<ParamRef> params = model.dense.Params();
      std::vector<ParamRef> grad_refs = DenseNetwork::GradRefs(&grads);
      if (model.head.HasParams()) {
        for (auto& p : model.head.Params()) params.push_back(p);
        for (auto& g : model.head.GradRefs()) grad_refs.push_back(g);
      }
      optimizer.Step(params, grad_refs);
      model.head.PostStep(out, batch.labels);
      epoch_loss += res.value;
      if (trace) trace->warnings += res.warnings;
      ++batch_count;
    }
    if (trace)
      trace->epoch_losses.push_back(batch_count > 0 ? epoch_loss / batch_count : 0.0);
  }
  return model;
}

NetworkModel TrainApcModel(const std::vector<Matrix>& utterances,
                           const ApcTrainOptions& options, TrainTrace* trace) {
  options.train.Validate();
  if (utterances.empty()) Throw(Status::kArg, "apc: no training utterances");
  const int dim = static_cast<int>(utterances.front().cols());

  Rng rng(options.train.seed);
  NetworkModel model;
  model.type = NetworkModel::Type::kGru;
  model.gru = GruEncoder(dim, options.gru_hidden, options.gru_layers, dim);
  model.gru.Initialize(&rng);
  model.head = LossHead::Create(LossKind::kL1Apc, 0, 0, LossHyper{}, &rng);

  Optimizer optimizer(options.train.optimizer, options.train.learning_rate);
  for (int epoch = 0; epoch < options.train.epochs; ++epoch) {
    std::vector<uint32_t> order = rng.Permutation(static_cast<uint32_t>(utterances.size()));
    double epoch_loss = 0.0;
    size_t positions = 0;
    GruGradients acc = model.gru.ZeroGradients();
    int in_batch = 0;
    auto flush = [&]() {
      if (in_batch == 0) return;
      AddGruL2(model.gru, options.train.l2_penalty, &acc);
      std::vector<ParamRef> params = model.gru.Params();
      std::vector<ParamRef> grads = GruEncoder::GradRefs(&acc);
      optimizer.Step(params, grads);
      acc = model.gru.ZeroGradients();
      in_batch = 0;
    };
    for (uint32_t u : order) {
      const ApcPairs pairs = MakeApcPairs(utterances[u], options.shift);
      if (pairs.inputs.rows() == 0) {
        if (trace && epoch == 0) trace->warnings++;
        continue;
      }
      GruCache cache;
      const Matrix out = model.gru.Forward(pairs.inputs, &cache);
      Matrix grad_out;
      epoch_loss += LossL1Apc(out, pairs.targets, &grad_out);
      positions += static_cast<size_t>(out.rows()) * out.cols();
      AccumulateGru(model.gru.Backward(cache, grad_out), &acc);
      if (++in_batch >= options.train.batch_size) flush();
    }
    flush();
    if (trace)
      trace->epoch_losses.push_back(positions > 0 ? epoch_loss / positions : 0.0);
  }
  return model;
}

Matrix TapModel(const NetworkModel& model, const std::vector<int>& layers,
                const Matrix& inputs) {
  if (layers.empty()) Throw(Status::kArg, "tap: no layers requested");
  std::vector<Matrix> taps;
  for (int layer : layers) {
    taps.push_back(model.type == NetworkModel::Type::kDense
                       ? model.dense.TapHidden(layer, inputs)
                       : model.gru.TapHidden(layer, inputs));
  }
  return ConcatLayers(taps);
}

namespace {

// Nudges biases until no pre-activation sits near a ReLU kink on this batch.
void AvoidReluKinks(DenseNetwork* net, const Matrix& batch) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    ForwardCache cache;
    net->Forward(batch, &cache);
    double closest = 1e9;
    int layer_at = -1;
    for (size_t l = 0; l < net->layers().size(); ++l) {
      if (net->layers()[l].activation != Activation::kRelu) continue;
      const double m = cache.pre[l].cwiseAbs().minCoeff();
      if (m < closest) {
        closest = m;
        layer_at = static_cast<int>(l);
      }
    }
    if (layer_at < 0 || closest > 1e-4) return;
    net->mutable_layers()[layer_at].bias.array() += 3e-3;
  }
}

GradCheckCase CheckCombo(LossKind loss, Activation activation, uint64_t seed,
                         double epsilon, double tolerance) {
  GradCheckCase result;
  result.name = LossKindName(loss) + "+" + ActivationName(activation);
  result.tolerance = tolerance;

  // Up to a few redraws to step off kink configurations.
  for (int attempt = 0; attempt < 5; ++attempt) {
    Rng rng(seed + 1000 * attempt);
    const int batch = 6, input_dim = 6, n_classes = 3;
    const int out_dim = loss == LossKind::kL1Apc ? 5
                        : LossUsesEmbedding(loss) ? 8
                                                  : n_classes;
    Matrix inputs(batch, input_dim);
    for (Eigen::Index i = 0; i < inputs.size(); ++i) inputs.data()[i] = rng.Gaussian();
    const std::vector<int> labels = {0, 0, 1, 1, 2, 2};
    std::vector<int> positive = {1, 0, 3, 2, 5, 4};
    Matrix targets(batch, out_dim);
    for (Eigen::Index i = 0; i < targets.size(); ++i) targets.data()[i] = rng.Gaussian();

    DenseNetwork net(input_dim, {5, 4, out_dim}, activation);
    net.Initialize(&rng);
    // A small random output bias keeps embeddings away from the exact zero
    // vector (a ReLU net can silence a whole row) and exercises the bias
    // gradients at a generic point.
    for (Eigen::Index i = 0; i < out_dim; ++i)
      net.mutable_layers().back().bias(i) = 0.3 * rng.Gaussian();
    if (activation == Activation::kRelu) AvoidReluKinks(&net, inputs);

    LossHyper hyper;
    hyper.triplet_margin = 0.37;
    LossHead head = LossHead::Create(loss, n_classes, LossUsesEmbedding(loss) ? out_dim : 0,
                                     hyper, &rng);
    // Zero centers or bias would mask missing terms in the analytic formulas.
    for (Eigen::Index i = 0; i < head.mutable_centers().size(); ++i)
      head.mutable_centers().data()[i] = rng.Gaussian();
    for (Eigen::Index i = 0; i < head.mutable_bias().size(); ++i)
      head.mutable_bias().data()[i] = 0.1 * rng.Gaussian();

    auto evaluate = [&]() {
      const Matrix out = net.Forward(inputs, nullptr);
      LossHead probe = head;  // separate gradient buffers; parameters shared by copy
      return probe
          .Evaluate(out, labels, loss == LossKind::kL1Apc ? &targets : nullptr,
                    loss == LossKind::kNtxent ? &positive : nullptr)
          .value;
    };

    ForwardCache cache;
    const Matrix out = net.Forward(inputs, &cache);
    LossHead::Result res = head.Evaluate(
        out, labels, loss == LossKind::kL1Apc ? &targets : nullptr,
        loss == LossKind::kNtxent ? &positive : nullptr);
    DenseGradients grads = net.Backward(cache, res.grad_output, 0.0);

    std::vector<ParamRef> params = net.Params();
    std::vector<ParamRef> analytic = DenseNetwork::GradRefs(&grads);
    if (head.HasParams()) {
      for (auto& p : head.Params()) params.push_back(p);
      for (auto& g : head.GradRefs()) analytic.push_back(g);
    }
    // The closure must see head-parameter perturbations, so the probe head in
    // `evaluate` copies from `head` on every call.
    const GradCheckReport report = CheckGradients(params, analytic, evaluate, epsilon);
    result.max_rel_error = report.max_rel_error;
    result.passed = report.max_rel_error < tolerance;
    if (result.passed) break;
  }
  return result;
}

GradCheckCase CheckComboRedrawing(LossKind loss, Activation activation, uint64_t seed,
                                  double epsilon, double tolerance) {
  // A degenerate draw (e.g. an exactly-zero embedding under ReLU) is a valid
  // error path of the loss, not a gradient defect; redraw it away.
  for (int redraw = 0;; ++redraw) {
    try {
      return CheckCombo(loss, activation, seed + 77777 * redraw, epsilon, tolerance);
    } catch (const Error&) {
      if (redraw >= 4) throw;
    }
  }
}

GradCheckCase CheckGruBptt(uint64_t seed, double epsilon, double tolerance) {
  GradCheckCase result;
  result.name = "gru_bptt+l1";
  result.tolerance = tolerance;
  Rng rng(seed);
  const int t_len = 7, dim = 4, hidden = 8, layers = 3;
  Matrix sequence(t_len, dim), targets(t_len, dim);
  for (Eigen::Index i = 0; i < sequence.size(); ++i) sequence.data()[i] = rng.Gaussian();
  for (Eigen::Index i = 0; i < targets.size(); ++i) targets.data()[i] = rng.Gaussian();

  GruEncoder gru(dim, hidden, layers, dim);
  gru.Initialize(&rng);

  auto evaluate = [&]() {
    const Matrix out = gru.Forward(sequence, nullptr);
    return LossL1Apc(out, targets, nullptr);
  };

  GruCache cache;
  const Matrix out = gru.Forward(sequence, &cache);
  Matrix grad_out;
  LossL1Apc(out, targets, &grad_out);
  GruGradients grads = gru.Backward(cache, grad_out);

  const GradCheckReport report =
      CheckGradients(gru.Params(), GruEncoder::GradRefs(&grads), evaluate, epsilon);
  result.max_rel_error = report.max_rel_error;
  result.passed = report.max_rel_error < tolerance;
  return result;
}

}  // namespace

std::vector<GradCheckCase> RunGradCheckSuite(uint64_t seed, double epsilon,
                                             double tolerance) {
  const LossKind losses[] = {LossKind::kCe,         LossKind::kFocal,
                             LossKind::kJointCenter, LossKind::kMsoftmax,
                             LossKind::kArcface,     LossKind::kOsl,
                             LossKind::kTripletCos,  LossKind::kTripletEuc,
                             LossKind::kNtxent,      LossKind::kL1Apc};
  const Activation activations[] = {Activation::kSigmoid, Activation::kRelu,
                                    Activation::kGelu};
  std::vector<GradCheckCase> cases;
  uint64_t case_seed = seed;
  for (LossKind loss : losses)
    for (Activation activation : activations)
      cases.push_back(CheckComboRedrawing(loss, activation, ++case_seed, epsilon, tolerance));
  cases.push_back(CheckGruBptt(seed + 999, epsilon, tolerance));
  return cases;
}

}  // namespace svbn
