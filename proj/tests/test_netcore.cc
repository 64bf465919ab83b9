// tests/test_netcore.cc

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

#include "core/activations.h"
#include "core/dense_net.h"
#include "core/gradcheck.h"
#include "core/gru.h"
#include "core/losses.h"
#include "core/optimizer.h"
#include "core/trainer.h"
#include "doctest.h"

using namespace svbn;

TEST_CASE("sigmoid at zero") {
  const ActivationValue v = ApplyActivation(Activation::kSigmoid, 0.0);
  CHECK(v.value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(v.derivative == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("relu sign cases") {
  CHECK(ApplyActivation(Activation::kRelu, -2.0).value == 0.0);
  CHECK(ApplyActivation(Activation::kRelu, -2.0).derivative == 0.0);
  CHECK(ApplyActivation(Activation::kRelu, 3.0).value == 3.0);
  CHECK(ApplyActivation(Activation::kRelu, 3.0).derivative == 1.0);
  CHECK(ApplyActivation(Activation::kRelu, 0.0).derivative == 0.0);
}

TEST_CASE("gelu at one matches the Gaussian-CDF value") {
  CHECK(ApplyActivation(Activation::kGelu, 1.0).value ==
        doctest::Approx(0.841345).epsilon(1e-6));
}

TEST_CASE("activations survive large inputs without overflow") {
  for (double v : {-750.0, -40.0, 40.0, 750.0}) {
    for (Activation a :
         {Activation::kSigmoid, Activation::kRelu, Activation::kGelu, Activation::kLinear}) {
      const ActivationValue av = ApplyActivation(a, v);
      CHECK(std::isfinite(av.value));
      CHECK(std::isfinite(av.derivative));
    }
  }
  CHECK(ApplyActivation(Activation::kSigmoid, 750.0).value == 1.0);
  CHECK(ApplyActivation(Activation::kSigmoid, -750.0).value ==
        doctest::Approx(0.0).epsilon(1e-300));
}

TEST_CASE("activation derivatives match central differences on a grid") {
  // Log-spaced grid over [-20, 20], staying off the ReLU kink at 0.
  std::vector<double> grid;
  for (double m = 1e-3; m <= 20.0; m *= 2.7) {
    grid.push_back(m);
    grid.push_back(-m);
  }
  const double eps = 1e-6;
  for (Activation a : {Activation::kSigmoid, Activation::kRelu, Activation::kGelu}) {
    for (double v : grid) {
      if (a == Activation::kRelu && std::abs(v) < 2.0 * eps) continue;
      const double numeric = (ApplyActivation(a, v + eps).value -
                              ApplyActivation(a, v - eps).value) /
                             (2.0 * eps);
      CHECK(std::abs(ApplyActivation(a, v).derivative - numeric) < 1e-6);
    }
  }
}

TEST_CASE("gelu limits and identity with the exact CDF") {
  CHECK(ApplyActivation(Activation::kGelu, 25.0).value == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(std::abs(ApplyActivation(Activation::kGelu, -25.0).value) < 1e-12);
  for (double v = -20.0; v <= 20.0; v += 0.37) {
    const double phi = 0.5 * (1.0 + std::erf(v / std::sqrt(2.0)));
    CHECK(std::abs(ApplyActivation(Activation::kGelu, v).value - v * phi) < 1e-12);
  }
}

TEST_CASE("zero network yields zero output") {
  DenseNetwork net(4, {3, 2}, Activation::kLinear);
  const Matrix out = net.Forward(Matrix::Random(5, 4), nullptr);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single linear layer is an affine map") {
  Rng rng(3);
  DenseNetwork net(3, {2}, Activation::kLinear);
  net.Initialize(&rng);
  const Matrix batch = Matrix::Random(6, 3);
  const Matrix out = net.Forward(batch, nullptr);
  const Matrix expected =
      (batch * net.layers()[0].weights.transpose()).rowwise() +
      net.layers()[0].bias.transpose();
  CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("paper-scale topology is constructible and runs") {
  Rng rng(5);
  DenseNetwork net(627, {1024, 1024, 1024, 1024, 1024, 1024, 300}, Activation::kGelu);
  net.Initialize(&rng);
  const Matrix out = net.Forward(Matrix::Random(2, 627), nullptr);
  CHECK(out.rows() == 2);
  CHECK(out.cols() == 300);
  CHECK(out.allFinite());
}

TEST_CASE("zero loss gradient leaves only the L2 term") {
  Rng rng(8);
  DenseNetwork net(4, {3, 2}, Activation::kSigmoid);
  net.Initialize(&rng);
  ForwardCache cache;
  net.Forward(Matrix::Random(5, 4), &cache);
  const double l2 = 0.01;
  const DenseGradients grads = net.Backward(cache, Matrix::Zero(5, 2), l2);
  for (int l = 0; l < net.NumLayers(); ++l) {
    CHECK((grads.weights[l] - l2 * net.layers()[l].weights).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(grads.bias[l].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("forward is bit-identical across runs with the same seed") {
  auto build = [] {
    Rng rng(123);
    DenseNetwork net(5, {4, 3}, Activation::kGelu);
    net.Initialize(&rng);
    return net;
  };
  DenseNetwork a = build();
  DenseNetwork b = build();
  Matrix batch(2, 5);
  batch << 1, 2, 3, 4, 5, -1, -2, -3, -4, -5;
  const Matrix out_a = a.Forward(batch, nullptr);
  const Matrix out_b = b.Forward(batch, nullptr);
  CHECK(std::memcmp(out_a.data(), out_b.data(), sizeof(double) * out_a.size()) == 0);
}

TEST_CASE("tap returns pre-activations consistent with forward") {
  Rng rng(9);
  DenseNetwork net(4, {3, 3, 2}, Activation::kSigmoid);
  net.Initialize(&rng);
  const Matrix batch = Matrix::Random(6, 4);
  ForwardCache cache;
  net.Forward(batch, &cache);
  for (int l = 1; l <= 3; ++l) {
    const Matrix tap = net.TapHidden(l, batch);
    CHECK((tap - cache.pre[l - 1]).cwiseAbs().maxCoeff() < 1e-14);
    // Applying the layer's activation to the tap reproduces forward output.
    Matrix value;
    ApplyActivation(net.layers()[l - 1].activation, tap, &value, nullptr);
    CHECK((value - cache.act[l - 1]).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS_AS(net.TapHidden(0, batch), Error);
  CHECK_THROWS_AS(net.TapHidden(4, batch), Error);
}

TEST_CASE("sgd with zero gradient leaves parameters unchanged") {
  Rng rng(10);
  DenseNetwork net(3, {2}, Activation::kLinear);
  net.Initialize(&rng);
  const Matrix before = net.layers()[0].weights;
  DenseGradients grads = net.ZeroGradients();
  Optimizer opt(OptimizerKind::kSgd, 0.5);
  opt.Step(net.Params(), DenseNetwork::GradRefs(&grads));
  CHECK((net.layers()[0].weights - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("first adam step moves by almost the learning rate") {
  // Closed form: m_hat = g, v_hat = g^2, step = lr * g/(|g| + eps).
  Vector param = Vector::Zero(1);
  Vector grad = Vector::Constant(1, 1.0);
  std::vector<ParamRef> params = {{param.data(), 1, "p"}};
  std::vector<ParamRef> grads = {{grad.data(), 1, "g"}};
  const double lr = 0.001;
  Optimizer opt(OptimizerKind::kAdam, lr);
  opt.Step(params, grads);
  CHECK(param(0) == doctest::Approx(-lr).epsilon(1e-7));
  CHECK(param(0) > -lr);  // eps makes the step strictly smaller
}

TEST_CASE("non-finite gradient aborts with diagnostics") {
  Vector param = Vector::Zero(3);
  Vector grad = Vector::Zero(3);
  grad(2) = std::numeric_limits<double>::quiet_NaN();
  std::vector<ParamRef> params = {{param.data(), 3, "layer1.W"}};
  std::vector<ParamRef> grads = {{grad.data(), 3, "layer1.W"}};
  Optimizer opt(OptimizerKind::kAdam, 0.001);
  try {
    opt.Step(params, grads);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.status() == Status::kNumeric);
    CHECK(std::string(e.what()).find("layer1.W") != std::string::npos);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("sgd descends on a convex single-layer instance") {
  Rng rng(12);
  DenseNetwork net(4, {3}, Activation::kLinear);  // linear + CE: convex in params
  net.Initialize(&rng);
  Matrix batch = Matrix::Random(16, 4);
  std::vector<int> labels;
  for (int i = 0; i < 16; ++i) labels.push_back(i % 3);
  Optimizer opt(OptimizerKind::kSgd, 0.05);
  double previous = 1e300;
  for (int step = 0; step < 5; ++step) {
    ForwardCache cache;
    const Matrix logits = net.Forward(batch, &cache);
    Matrix grad_logits;
    const double loss = LossCe(logits, labels, &grad_logits);
    CHECK(loss < previous);
    previous = loss;
    DenseGradients grads = net.Backward(cache, grad_logits, 0.0);
    opt.Step(net.Params(), DenseNetwork::GradRefs(&grads));
  }
}

TEST_CASE("grad check flags a corrupted gradient") {
  // Relative error of a doubled gradient is |2a - a| / (3|a|) = 1/3.
  Rng rng(14);
  DenseNetwork net(3, {2}, Activation::kLinear);
  net.Initialize(&rng);
  const Matrix batch = Matrix::Random(4, 3);
  const std::vector<int> labels = {0, 1, 0, 1};
  auto loss = [&] {
    return LossCe(net.Forward(batch, nullptr), labels, nullptr);
  };
  ForwardCache cache;
  net.Forward(batch, &cache);
  Matrix grad_logits;
  LossCe(net.Forward(batch, nullptr), labels, &grad_logits);
  DenseGradients grads = net.Backward(cache, grad_logits, 0.0);
  const GradCheckReport clean =
      CheckGradients(net.Params(), DenseNetwork::GradRefs(&grads), loss, 1e-5);
  CHECK(clean.max_rel_error < 1e-6);

  for (auto& w : grads.weights) w *= 2.0;
  for (auto& b : grads.bias) b *= 2.0;
  const GradCheckReport corrupted =
      CheckGradients(net.Params(), DenseNetwork::GradRefs(&grads), loss, 1e-5);
  CHECK(corrupted.max_rel_error == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("grad check on a constant closure reports near zero") {
  Vector param = Vector::Constant(4, 1.0);
  Vector grad = Vector::Zero(4);
  std::vector<ParamRef> params = {{param.data(), 4, "p"}};
  std::vector<ParamRef> grads = {{grad.data(), 4, "p"}};
  const GradCheckReport report =
      CheckGradients(params, grads, [] { return 42.0; }, 1e-5);
  CHECK(report.max_rel_error < 1e-9);
}

TEST_CASE("grad check refuses oversized models") {
  Vector param = Vector::Zero(64);
  Vector grad = Vector::Zero(64);
  std::vector<ParamRef> params = {{param.data(), 64, "p"}};
  std::vector<ParamRef> grads = {{grad.data(), 64, "p"}};
  CHECK_THROWS_AS(CheckGradients(params, grads, [] { return 0.0; }, 1e-5, 10), Error);
}

TEST_CASE("all-zero gru produces zero outputs") {
  GruEncoder gru(3, 4, 2, 3);
  const Matrix out = gru.Forward(Matrix::Random(6, 3), nullptr);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gru bptt matches finite differences on the 3-layer width-8 instance") {
  Rng rng(2024);
  const int t_len = 7, dim = 4;
  GruEncoder gru(dim, 8, 3, dim);
  gru.Initialize(&rng);
  Matrix sequence(t_len, dim), targets(t_len, dim);
  for (Eigen::Index i = 0; i < sequence.size(); ++i) sequence.data()[i] = rng.Gaussian();
  for (Eigen::Index i = 0; i < targets.size(); ++i) targets.data()[i] = rng.Gaussian();

  GruCache cache;
  const Matrix out = gru.Forward(sequence, &cache);
  Matrix grad_out;
  LossL1Apc(out, targets, &grad_out);
  GruGradients grads = gru.Backward(cache, grad_out);
  auto loss = [&] { return LossL1Apc(gru.Forward(sequence, nullptr), targets, nullptr); };
  const GradCheckReport report =
      CheckGradients(gru.Params(), GruEncoder::GradRefs(&grads), loss, 1e-5);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("gru tap returns the hidden sequence of the requested layer") {
  Rng rng(31);
  GruEncoder gru(3, 5, 2, 3);
  gru.Initialize(&rng);
  const Matrix sequence = Matrix::Random(9, 3);
  GruCache cache;
  gru.Forward(sequence, &cache);
  for (int l = 1; l <= 2; ++l)
    CHECK((gru.TapHidden(l, sequence) - cache.h[l - 1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(gru.TapHidden(3, sequence), Error);
}

TEST_CASE("gradient check suite passes for every loss and activation") {
  const auto cases = RunGradCheckSuite(20260809, 1e-5, 1e-4);
  CHECK(cases.size() == 31);  // 10 losses x 3 activations + gru
  for (const auto& c : cases) {
    INFO(c.name, " max_rel_error=", c.max_rel_error);
    CHECK(c.passed);
  }
}
