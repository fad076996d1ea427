/* Copyright 2026 The jamcomp Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "nn/adam.h"
#include "nn/ae_model.h"
#include "nn/layers.h"
#include "nn/losses.h"
#include "nn/model_file.h"
#include "nn/train.h"
#include "unit/grad_check.h"
#include "unit/oracles.h"

namespace jamcomp {
namespace {

Matrix RandomMatrix(int rows, int cols, uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.Normal();
  return m;
}

TEST_CASE("forward: identity dense layer returns its input") {
  Dense d(4, 4);
  for (int i = 0; i < 4; ++i) d.weight().value[i * 4 + i] = 1.0;
  const Matrix x = RandomMatrix(3, 4, 1);
  CHECK(d.Apply(x) == x);
  Sequential net;
  net.Add(d);
  net.Add(ActivationLayer(Activation::kLinear, 4));
  CHECK(net.Apply(x) == x);
}

TEST_CASE("forward: zero weights with ReLU give zero latent and reconstruction") {
  AeModel m(DenseEncoderSpecs(6, {5}, 3), DenseDecoderSpecs(6, {5}, 3), 3, false, 1);
  for (Param* p : m.Params()) std::fill(p->value.begin(), p->value.end(), 0.0);
  const auto out = m.Infer(RandomMatrix(4, 6, 2));
  for (double v : out.latent.data()) CHECK(v == 0.0);
  for (double v : out.reconstruction.data()) CHECK(v == 0.0);
}

TEST_CASE("forward: random two-layer model matches a scalar loop") {
  AeModel m({LayerSpec::MakeDense(5, 4, Activation::kReLU)},
            {LayerSpec::MakeDense(4, 5, Activation::kSigmoid)}, 4, false, 7);
  Rng rng(3);
  for (Param* p : m.Params()) {
    for (double& v : p->value) v = rng.Normal();
  }
  const Matrix x = RandomMatrix(3, 5, 4);
  const auto stages = m.InferenceStages();
  REQUIRE(stages.size() == 2);
  const auto& w1 = stages[0].weight->value;
  const auto& b1 = stages[0].bias->value;
  const auto& w2 = stages[1].weight->value;
  const auto& b2 = stages[1].bias->value;
  const auto out = m.Infer(x);
  for (int r = 0; r < 3; ++r) {
    double h[4];
    for (int o = 0; o < 4; ++o) {
      double acc = b1[o];
      for (int i = 0; i < 5; ++i) acc += w1[o * 5 + i] * x(r, i);
      h[o] = acc > 0.0 ? acc : 0.0;
      CHECK(std::abs(out.latent(r, o) - h[o]) < 1e-12);
    }
    for (int o = 0; o < 5; ++o) {
      double acc = b2[o];
      for (int i = 0; i < 4; ++i) acc += w2[o * 4 + i] * h[i];
      CHECK(std::abs(out.reconstruction(r, o) - 1.0 / (1.0 + std::exp(-acc))) < 1e-6);
    }
  }
}

TEST_CASE("forward: wrong input width is a shape error") {
  AeModel m(DenseEncoderSpecs(6, {5}, 3), DenseDecoderSpecs(6, {5}, 3), 3, false, 1);
  try {
    m.Infer(RandomMatrix(2, 7, 1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShape);
  }
}

TEST_CASE("backprop: linear autoencoder gradient equals the closed form") {
  const int d = 5, k = 2, b = 4;
  AeModel m({LayerSpec::MakeDense(d, k, Activation::kLinear)},
            {LayerSpec::MakeDense(k, d, Activation::kLinear)}, k, false, 11);
  const Matrix x = RandomMatrix(b, d, 12);
  m.ZeroGrad();
  m.ForwardBackward(x, 0);
  const auto params = m.Params();  // w1, b1, w2, b2
  const auto& w1 = params[0]->value;
  const auto& b1 = params[1]->value;
  const auto& w2 = params[2]->value;
  const auto& b2 = params[3]->value;
  // L = sum (W2 (W1 x + b1) + b2 - x)^2 / (B d)
  std::vector<double> gw1(k * d, 0.0), gb1(k, 0.0), gw2(d * k, 0.0), gb2(d, 0.0);
  const double s = 2.0 / (b * d);
  for (int r = 0; r < b; ++r) {
    std::vector<double> h(k), res(d);
    for (int j = 0; j < k; ++j) {
      h[j] = b1[j];
      for (int i = 0; i < d; ++i) h[j] += w1[j * d + i] * x(r, i);
    }
    for (int i = 0; i < d; ++i) {
      res[i] = b2[i] - x(r, i);
      for (int j = 0; j < k; ++j) res[i] += w2[i * k + j] * h[j];
    }
    for (int i = 0; i < d; ++i) {
      gb2[i] += s * res[i];
      for (int j = 0; j < k; ++j) gw2[i * k + j] += s * res[i] * h[j];
    }
    for (int j = 0; j < k; ++j) {
      double back = 0.0;
      for (int i = 0; i < d; ++i) back += w2[i * k + j] * res[i];
      gb1[j] += s * back;
      for (int i = 0; i < d; ++i) gw1[j * d + i] += s * back * x(r, i);
    }
  }
  auto close = [](const std::vector<double>& a, const std::vector<double>& e) {
    for (size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - e[i]) > 1e-8) return false;
    }
    return true;
  };
  CHECK(close(params[0]->grad, gw1));
  CHECK(close(params[1]->grad, gb1));
  CHECK(close(params[2]->grad, gw2));
  CHECK(close(params[3]->grad, gb2));
}

TEST_CASE("backprop: perfect reconstruction gives zero gradients") {
  const int d = 4;
  AeModel m({LayerSpec::MakeDense(d, d, Activation::kLinear)},
            {LayerSpec::MakeDense(d, d, Activation::kLinear)}, d, false, 1);
  for (Param* p : m.Params()) std::fill(p->value.begin(), p->value.end(), 0.0);
  const auto params = m.Params();
  for (int i = 0; i < d; ++i) {
    params[0]->value[i * d + i] = 1.0;
    params[2]->value[i * d + i] = 1.0;
  }
  m.ZeroGrad();
  const auto loss = m.ForwardBackward(RandomMatrix(3, d, 5), 0);
  CHECK(loss.total == 0.0);
  for (const Param* p : params) {
    for (double g : p->grad) CHECK(g == 0.0);
  }
}

TEST_CASE("gradients: dense layer") {
  Rng rng(1);
  Dense d(6, 4);
  d.Init(rng, 1.0);
  for (double& v : d.bias().value) v = rng.Normal();
  CHECK(testing::LayerGradientPassRate(d, RandomMatrix(3, 6, 2)) == 1.0);
}

TEST_CASE("gradients: conv1d stride 2") {
  Rng rng(2);
  Conv1d c(2, 16, 3, 5, 2);
  c.Init(rng, 1.0);
  for (double& v : c.bias().value) v = rng.Normal();
  CHECK(testing::LayerGradientPassRate(c, RandomMatrix(2, 32, 3)) == 1.0);
}

TEST_CASE("gradients: conv1d shape rule") {
  CHECK(Conv1d::OutputLength(128, 5, 2) == 64);
  CHECK(Conv1d::OutputLength(128, 3, 1) == 128);
  CHECK(Conv1d::OutputLength(7, 3, 2) == 4);
}

TEST_CASE("gradients: conv2d stride 2") {
  Rng rng(3);
  Conv2d c(2, 6, 6, 3, 3, 2);
  c.Init(rng, 1.0);
  CHECK(c.out_h() == 3);
  CHECK(testing::LayerGradientPassRate(c, RandomMatrix(2, 72, 4)) == 1.0);
}

TEST_CASE("gradients: activations") {
  for (auto a : {Activation::kLinear, Activation::kReLU, Activation::kSigmoid,
                 Activation::kLeakyReLU}) {
    ActivationLayer layer(a, 7);
    CHECK(testing::LayerGradientPassRate(layer, RandomMatrix(4, 7, 5)) >= 0.99);
    CHECK(ParseActivation(ActivationName(a)) == a);
  }
}

TEST_CASE("gradients: batch norm in training mode") {
  BatchNorm bn(5);
  Rng rng(6);
  for (Param* p : bn.Params()) {
    for (double& v : p->value) v = 1.0 + 0.3 * rng.Normal();
  }
  CHECK(testing::LayerGradientPassRate(bn, RandomMatrix(6, 5, 7)) == 1.0);
}

TEST_CASE("gradients: residual block") {
  Rng rng(8);
  ResidualBlock block(2, 4, 4, rng);
  CHECK(testing::LayerGradientPassRate(block, RandomMatrix(2, 32, 9)) >= 0.99);
}

TEST_CASE("gradients: losses") {
  const Matrix x = RandomMatrix(3, 4, 1);
  Matrix xh = RandomMatrix(3, 4, 2);
  const Matrix g = MseGrad(x, xh);
  for (size_t i = 0; i < xh.size(); ++i) {
    const double fd =
        oracle::CentralDifference(xh.data(), i, [&] { return MseLoss(x, xh); });
    CHECK(oracle::CloseRel(g.data()[i], fd, 1e-6));
  }

  Matrix mu = RandomMatrix(3, 2, 3), lv = RandomMatrix(3, 2, 4, 0.5);
  const auto kg = GaussianKlGrad(mu, lv);
  for (size_t i = 0; i < mu.size(); ++i) {
    CHECK(oracle::CloseRel(
        kg.d_mu.data()[i],
        oracle::CentralDifference(mu.data(), i, [&] { return GaussianKl(mu, lv); }), 1e-6));
    CHECK(oracle::CloseRel(
        kg.d_logvar.data()[i],
        oracle::CentralDifference(lv.data(), i, [&] { return GaussianKl(mu, lv); }), 1e-6));
  }

  Matrix logits = RandomMatrix(4, 3, 5);
  const std::vector<int> labels = {0, 2, 1, 2};
  const auto ce = SoftmaxCrossEntropy(logits, labels);
  for (size_t i = 0; i < logits.size(); ++i) {
    const double fd = oracle::CentralDifference(
        logits.data(), i, [&] { return SoftmaxCrossEntropy(logits, labels).loss; });
    CHECK(oracle::CloseRel(ce.grad.data()[i], fd, 1e-6));
  }
}

TEST_CASE("gradients: variational autoencoder end to end") {
  AeModel m(DenseEncoderSpecs(6, {5}, 3), DenseDecoderSpecs(6, {5}, 3), 3, true, 4);
  const Matrix x = RandomMatrix(4, 6, 6, 0.5);
  m.ZeroGrad();
  m.ForwardBackward(x, 99);
  long total = 0, pass = 0;
  for (Param* p : m.Params()) {
    for (size_t i = 0; i < p->value.size(); ++i) {
      const double fd =
          oracle::CentralDifference(p->value, i, [&] { return m.Evaluate(x, 99).total; });
      ++total;
      pass += testing::GradientAgrees(p->grad[i], fd);
    }
  }
  CHECK(static_cast<double>(pass) / total >= 0.99);
}

TEST_CASE("adam: first step moves each parameter by about lr") {
  std::vector<double> w = {1.0, -2.0, 0.5};
  const std::vector<double> g = {0.3, -4.0, 1e-3};
  AdamState st;
  st.config.lr = 0.01;
  const auto before = w;
  AdamStep(w, g, st);
  for (size_t i = 0; i < w.size(); ++i) {
    const double expect = 0.01 * std::abs(g[i]) / (std::abs(g[i]) + st.config.eps);
    CHECK(std::abs(std::abs(w[i] - before[i]) - expect) < 1e-12);
    CHECK((w[i] - before[i]) * g[i] < 0.0);
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<double> w = {1.0, 2.0};
  AdamState st;
  for (int i = 0; i < 3; ++i) AdamStep(w, std::vector<double>{0.0, 0.0}, st);
  CHECK(w == std::vector<double>{1.0, 2.0});
}

TEST_CASE("adam: three steps on w^2 follow a hand-traced sequence") {
  // Scalar trace written out from the update rule.
  double w = 1.0, m = 0.0, v = 0.0;
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<double> trace;
  for (int t = 1; t <= 3; ++t) {
    const double g = 2.0 * w;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    w -= lr * mh / (std::sqrt(vh) + eps);
    trace.push_back(w);
  }
  // First step is exactly lr (up to eps) for any gradient sign.
  CHECK(trace[0] == doctest::Approx(0.9).epsilon(1e-8));

  std::vector<double> p = {1.0};
  AdamState st;
  st.config = {lr, b1, b2, eps};
  for (int t = 0; t < 3; ++t) {
    AdamStep(p, std::vector<double>{2.0 * p[0]}, st);
    CHECK(std::abs(p[0] - trace[t]) < 1e-12);
  }
  CHECK(st.t == 3);
}

TEST_CASE("mse: identical inputs give 0 and zeros vs ones give 1") {
  const Matrix a = RandomMatrix(3, 3, 1);
  CHECK(MseLoss(a, a) == 0.0);
  CHECK(MseLoss(Matrix(2, 5, 0.0), Matrix(2, 5, 1.0)) == 1.0);
  const Matrix b = RandomMatrix(3, 3, 2);
  double s = 0.0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) s += (a(r, c) - b(r, c)) * (a(r, c) - b(r, c));
  }
  CHECK(MseLoss(a, b) == doctest::Approx(s / 9.0));
}

TEST_CASE("kl: prior posterior gives 0 and mu 1 gives 0.5") {
  CHECK(GaussianKl(Matrix(2, 3, 0.0), Matrix(2, 3, 0.0)) == 0.0);
  CHECK(GaussianKl(Matrix(1, 1, 1.0), Matrix(1, 1, 0.0)) == doctest::Approx(0.5));
}

TEST_CASE("kl: closed form agrees with numerical integration") {
  for (double mu : {-1.5, 0.0, 0.7, 2.0}) {
    for (double lv : {-2.0, -0.5, 0.0, 0.8}) {
      const double closed = GaussianKl(Matrix(1, 1, mu), Matrix(1, 1, lv));
      CHECK(std::abs(closed - oracle::KlByQuadrature(mu, std::exp(0.5 * lv))) <= 1e-3);
    }
  }
}

TEST_CASE("reparameterize: clamping, repeatability and moments") {
  const Matrix mu(1, 2, 0.3);
  Matrix lv(1, 2, -1e9);
  Matrix noise;
  const Matrix z = Reparameterize(mu, lv, 1, &noise);
  for (size_t i = 0; i < z.size(); ++i) {
    CHECK(z.data()[i] == doctest::Approx(0.3 + std::exp(-5.0) * noise.data()[i]));
  }
  CHECK(ClampLogVar(-50.0) == kLogVarMin);
  CHECK(ClampLogVar(50.0) == kLogVarMax);

  const Matrix m2 = RandomMatrix(3, 2, 1), l2 = RandomMatrix(3, 2, 2);
  CHECK(Reparameterize(m2, l2, 42) == Reparameterize(m2, l2, 42));

  const int n = 100000;
  const Matrix mus(n, 1, 1.5), lvs(n, 1, std::log(0.25));
  const Matrix draws = Reparameterize(mus, lvs, 7);
  double mean = 0.0, var = 0.0;
  for (double v : draws.data()) mean += v / n;
  for (double v : draws.data()) var += (v - mean) * (v - mean) / n;
  CHECK(std::abs(mean - 1.5) <= 0.01 * 1.5);
  CHECK(std::abs(var - 0.25) <= 0.01 * 0.25 * 2.0);
}

Matrix PlaneData(int n, uint64_t seed) {
  // Points on a 2-D affine plane inside [0, 1]^10.
  Rng rng(seed);
  Matrix basis(2, 10);
  for (double& v : basis.data()) v = rng.Uniform(-0.2, 0.2);
  Matrix x(n, 10);
  for (int r = 0; r < n; ++r) {
    const double a = rng.Uniform(-1, 1), b = rng.Uniform(-1, 1);
    for (int c = 0; c < 10; ++c) x(r, c) = 0.5 + a * basis(0, c) + b * basis(1, c);
  }
  return x;
}

TEST_CASE("train: rank-2 data through a latent of 2 reaches val MSE below 1e-3") {
  AeModel m({LayerSpec::MakeDense(10, 2, Activation::kLinear)},
            {LayerSpec::MakeDense(2, 10, Activation::kLinear)}, 2, false, 3);
  TrainOptions opt;
  opt.max_epochs = 200;
  opt.learning_rate = 1e-2;
  opt.seed = 1;
  const auto r = TrainAutoencoder(std::move(m), PlaneData(256, 1), PlaneData(64, 1), opt);
  CHECK(r.history.best_val_mse < 1e-3);
}

TEST_CASE("train: patience 0 stops at the first non-improving epoch") {
  AeModel m(DenseEncoderSpecs(10, {8}, 2), DenseDecoderSpecs(10, {8}, 2), 2, false, 3);
  TrainOptions opt;
  opt.max_epochs = 500;
  opt.patience = 0;
  opt.learning_rate = 5e-2;
  const auto r = TrainAutoencoder(std::move(m), PlaneData(64, 2), PlaneData(32, 3), opt);
  const auto& e = r.history.epochs;
  REQUIRE(e.size() >= 2);
  CHECK(r.history.early_stopped);
  for (size_t i = 1; i + 1 < e.size(); ++i) CHECK(e[i].val_mse < e[i - 1].val_mse);
  CHECK(e.back().val_mse >= r.history.best_val_mse);
}

TEST_CASE("train: identical seeds give identical histories") {
  auto run = [] {
    AeModel m(DenseEncoderSpecs(10, {8}, 2), DenseDecoderSpecs(10, {8}, 2), 2, true, 5);
    TrainOptions opt;
    opt.max_epochs = 5;
    opt.seed = 9;
    return TrainAutoencoder(std::move(m), PlaneData(64, 2), PlaneData(16, 3), opt);
  };
  const auto a = run(), b = run();
  REQUIRE(a.history.epochs.size() == b.history.epochs.size());
  for (size_t i = 0; i < a.history.epochs.size(); ++i) {
    CHECK(a.history.epochs[i].train_loss == b.history.epochs[i].train_loss);
    CHECK(a.history.epochs[i].val_mse == b.history.epochs[i].val_mse);
  }
}

TEST_CASE("train: non-finite loss is reported as divergence with the epoch") {
  AeModel m(DenseEncoderSpecs(4, {4}, 2), DenseDecoderSpecs(4, {4}, 2), 2, false, 1);
  Matrix bad(8, 4, 1e200);
  TrainOptions opt;
  opt.max_epochs = 3;
  try {
    TrainAutoencoder(std::move(m), bad, bad, opt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDiverged);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("model file: save and load reproduce parameters and metadata") {
  AeModel m(DenseEncoderSpecs(7, {6, 5}, 3), DenseDecoderSpecs(7, {6, 5}, 3), 3, true, 2);
  m.RoundToFloat();
  m.metadata["arch"] = "test";
  const auto path = std::filesystem::temp_directory_path() / "jamcomp_test_model.aem";
  SaveModel(path, m);
  const AeModel back = LoadModel(path);
  CHECK(back.variational());
  CHECK(back.metadata["arch"] == "test");
  const auto pa = m.Params();
  const auto pb = back.Params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
  const Matrix x = RandomMatrix(2, 7, 1);
  CHECK(m.Infer(x).reconstruction == back.Infer(x).reconstruction);
  std::filesystem::remove(path);
}

TEST_CASE("model file: wrong magic is a format error") {
  const auto path = std::filesystem::temp_directory_path() / "jamcomp_test_bad.aem";
  std::ofstream(path) << "NOPE....";
  try {
    LoadModel(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace jamcomp
