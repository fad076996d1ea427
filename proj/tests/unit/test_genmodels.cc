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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "doctest.h"
#include "genmodels/factor_vae.h"
#include "nn/losses.h"
#include "unit/expect_error.h"
#include "unit/grad_check.h"
#include "unit/oracles.h"

namespace jamcomp {
namespace {

using testing::ErrorCodeOf;

FactorVaeConfig TinyConfig(uint64_t seed = 0) {
  FactorVaeConfig c;
  c.image_size = 8;
  c.latent_dim = 3;
  c.epochs = 2;
  c.batch_size = 4;
  c.disc_width = 16;
  c.seed = seed;
  return c;
}

Matrix Images(int n, int dim, uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, dim);
  for (double& v : m.data()) v = rng.Uniform(0.0, 1.0);
  return m;
}

TEST_CASE("discriminator: zero weights give cross-entropy ln 2") {
  Rng rng(1);
  Sequential d = MakeDiscriminator(8, 256, 4, rng);
  for (Param* p : d.Params()) std::fill(p->value.begin(), p->value.end(), 0.0);
  const Matrix z = Images(16, 8, 2);
  const auto r = TcLoss(d, z, PermuteDims(z, 3), 6.4);
  CHECK(std::abs(r.disc_loss - std::numbers::ln2) <= 1e-6);
  CHECK(r.generator_term == 0.0);
}

TEST_CASE("discriminator: gradient matches finite differences") {
  Rng rng(2);
  Sequential d = MakeDiscriminator(3, 8, 3, rng);
  const Matrix z = Images(6, 3, 3);
  const Matrix zp = PermuteDims(z, 4);
  d.ZeroGrad();
  DiscriminatorLossBackward(d, z, zp);
  long total = 0, pass = 0;
  for (Param* p : d.Params()) {
    const auto analytic = p->grad;
    for (size_t i = 0; i < p->value.size(); ++i) {
      ++total;
      pass += testing::GradientAgrees(
          analytic[i],
          oracle::CentralDifference(p->value, i, [&] { return TcLoss(d, z, zp, 1.0).disc_loss; }));
    }
  }
  CHECK(static_cast<double>(pass) / total >= 0.99);
}

TEST_CASE("permute dims: per-column multisets are preserved exactly") {
  const Matrix z = Images(37, 5, 5);
  const Matrix p = PermuteDims(z, 11);
  for (int c = 0; c < 5; ++c) {
    std::vector<double> a, b;
    for (int r = 0; r < 37; ++r) {
      a.push_back(z(r, c));
      b.push_back(p(r, c));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
  CHECK(PermuteDims(z, 11) == p);
}

TEST_CASE("permute dims: each column follows its own seeded permutation") {
  // Encode the row index in every column so the permutation can be read back.
  Matrix z(20, 4);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 4; ++c) z(r, c) = r;
  }
  const Matrix p = PermuteDims(z, 7);
  for (int c = 0; c < 4; ++c) {
    Rng rng(MixSeed(7, c));
    const auto perm = rng.Permutation(20);
    for (int r = 0; r < 20; ++r) CHECK(p(r, c) == perm[r]);
  }
  bool columns_differ = false;
  for (int r = 0; r < 20; ++r) columns_differ = columns_differ || p(r, 0) != p(r, 1);
  CHECK(columns_differ);
  // A batch of one is its own permutation.
  CHECK(PermuteDims(z.SelectRows(std::vector<int>{3}), 1) == z.SelectRows(std::vector<int>{3}));
}

TEST_CASE("vae: gradients of the full objective match finite differences") {
  FactorVae m(TinyConfig(1));
  const Matrix x = Images(4, 64, 6);
  m.ZeroVaeGrad();
  m.VaeForwardBackward(x, 9, true);
  // Snapshot first: every probe below accumulates into all gradients.
  std::vector<std::vector<double>> grads;
  for (Param* p : m.VaeParams()) grads.push_back(p->grad);
  long total = 0, pass = 0;
  Rng pick(3);
  size_t k = 0;
  for (Param* p : m.VaeParams()) {
    const auto& analytic = grads[k++];
    // Sample entries of the large tensors to keep the check fast.
    const size_t stride = std::max<size_t>(1, p->value.size() / 40);
    for (size_t i = pick.UniformInt(stride); i < p->value.size(); i += stride) {
      ++total;
      pass += testing::GradientAgrees(analytic[i], oracle::CentralDifference(p->value, i, [&] {
                                        return m.VaeForwardBackward(x, 9, true).total;
                                      }));
    }
  }
  CHECK(total > 100);
  CHECK(static_cast<double>(pass) / total >= 0.99);
}

TEST_CASE("vae: tc weight 0 leaves the VAE gradient unchanged") {
  FactorVaeConfig c = TinyConfig(2);
  c.tc_weight = 0.0;
  FactorVae m(c);
  const Matrix x = Images(4, 64, 7);
  m.ZeroVaeGrad();
  const auto with = m.VaeForwardBackward(x, 5, true);
  std::vector<std::vector<double>> g1;
  for (Param* p : m.VaeParams()) g1.push_back(p->grad);
  m.ZeroVaeGrad();
  const auto without = m.VaeForwardBackward(x, 5, false);
  size_t k = 0;
  for (Param* p : m.VaeParams()) CHECK(p->grad == g1[k++]);
  CHECK(with.total == without.total);
}

TEST_CASE("vae: reconstruction term scales with its weight") {
  FactorVaeConfig c = TinyConfig(3);
  c.recon_weight = 1.0;
  FactorVae a(c);
  c.recon_weight = 4.0;
  FactorVae b(c);
  const Matrix x = Images(4, 64, 8);
  const auto la = a.VaeForwardBackward(x, 1, false);
  const auto lb = b.VaeForwardBackward(x, 1, false);
  CHECK(lb.recon == doctest::Approx(4.0 * la.recon));
  CHECK(lb.recon_mse == la.recon_mse);
  CHECK(lb.kl == la.kl);
}

TEST_CASE("train: history has one entry per epoch and runs repeat exactly") {
  const Matrix x = Images(12, 64, 9);
  const auto a = TrainFactorVae(TinyConfig(4), x);
  const auto b = TrainFactorVae(TinyConfig(4), x);
  REQUIRE(a.history.size() == 2);
  for (size_t e = 0; e < a.history.size(); ++e) {
    CHECK(a.history[e].epoch == static_cast<int>(e) + 1);
    CHECK(a.history[e].recon_mse == b.history[e].recon_mse);
    CHECK(a.history[e].disc_loss == b.history[e].disc_loss);
  }
  CHECK(a.model.Reconstruct(x) == b.model.Reconstruct(x));
}

TEST_CASE("train: invalid configurations are rejected") {
  FactorVaeConfig c = TinyConfig();
  c.image_size = 12;
  CHECK(ErrorCodeOf([&] { c.Validate(); }) == ErrorCode::kInvalidSpec);
  c = TinyConfig();
  c.recon_weight = 0.0;
  CHECK(ErrorCodeOf([&] { c.Validate(); }) == ErrorCode::kInvalidSpec);
  c = TinyConfig();
  c.tc_weight = -1.0;
  CHECK(ErrorCodeOf([&] { c.Validate(); }) == ErrorCode::kInvalidSpec);
  CHECK(FactorVaeConfig::FromJson(TinyConfig(5).ToJson()).ToJson() == TinyConfig(5).ToJson());
}

TEST_CASE("interpolate: endpoints equal direct decodings bit for bit") {
  const FactorVae m(TinyConfig(5));
  const Matrix x = Images(2, 64, 10);
  const Matrix strip = Interpolate(m, x.row(0), x.row(1), 7);
  REQUIRE(strip.rows() == 7);
  const auto enc = m.Encode(x);
  const Matrix direct = m.Decode(enc.mu);
  for (int c = 0; c < 64; ++c) {
    CHECK(strip(0, c) == direct(0, c));
    CHECK(strip(6, c) == direct(1, c));
  }
}

TEST_CASE("interpolate: interior rows decode the blended means") {
  const FactorVae m(TinyConfig(6));
  const Matrix x = Images(2, 64, 11);
  const Matrix strip = Interpolate(m, x.row(0), x.row(1), 5);
  const auto enc = m.Encode(x);
  for (int s = 1; s < 4; ++s) {
    const double t = s / 4.0;
    Matrix z(1, 3);
    for (int d = 0; d < 3; ++d) z(0, d) = (1 - t) * enc.mu(0, d) + t * enc.mu(1, d);
    const Matrix y = m.Decode(z);
    for (int c = 0; c < 64; ++c) CHECK(std::abs(strip(s, c) - y(0, c)) <= 1e-12);
  }
}

TEST_CASE("model file: save and load preserve decodings") {
  const FactorVae m(TinyConfig(7));
  const auto path = std::filesystem::temp_directory_path() / "jamcomp_test_fvae.bin";
  m.Save(path);
  const FactorVae back = FactorVae::Load(path);
  const Matrix x = Images(3, 64, 12);
  const Matrix a = m.Reconstruct(x), b = back.Reconstruct(x);
  for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.data()[i] - b.data()[i]) <= 1e-6);
  CHECK(back.config().ToJson() == m.config().ToJson());
  std::filesystem::remove(path);
}

TEST_CASE("spectrogram: shape and range") {
  DatasetSpec spec = DefaultDatasetSpec(1, 3);
  spec.n_samples = 4096;
  const auto snaps = MakeDataset(spec);
  const Matrix img = SpectrogramImages(snaps);
  CHECK(img.rows() == static_cast<int>(snaps.size()));
  CHECK(img.cols() == 32 * 32);
  for (int r = 0; r < img.rows(); ++r) {
    const auto row = img.row(r);
    CHECK(*std::min_element(row.begin(), row.end()) >= 0.0);
    CHECK(*std::max_element(row.begin(), row.end()) <= 1.0);
  }
}

TEST_CASE("pad to square: zero fill below and to the right") {
  const std::vector<double> img = {1, 2, 3, 4, 5, 6};  // 2 x 3
  int side = 0;
  const auto sq = PadToSquare(img, 2, 3, &side);
  CHECK(side == 3);
  CHECK(sq == std::vector<double>{1, 2, 3, 4, 5, 6, 0, 0, 0});
}

TEST_CASE("head: one linear layer separates separable latents perfectly") {
  Rng rng(4);
  Matrix x(120, 4);
  std::vector<int> y;
  for (int r = 0; r < 120; ++r) {
    const int c = r % 3;
    y.push_back(c);
    for (int j = 0; j < 4; ++j) x(r, j) = rng.Normal() * 0.1 + (j == c ? 3.0 : 0.0);
  }
  HeadSpec spec;
  spec.n_linear = 1;
  HeadTrainConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 1e-2;
  const auto r = TrainHeadOnFeatures(x, y, x, y, 3, spec, cfg);
  CHECK(r.accuracy == 1.0);
  CHECK(r.f2 == doctest::Approx(1.0));
}

TEST_CASE("head: grid covers depth, inter-op and source") {
  const auto grid = DefaultHeadGrid();
  CHECK(grid.size() == 18);
  std::set<std::string> names;
  for (const auto& h : grid) names.insert(h.Name());
  CHECK(names.size() == 18);
  CHECK(names.count("2-relu-mu-logvar") == 1);
}

TEST_CASE("latent features: sources have the expected widths") {
  const FactorVae m(TinyConfig(8));
  const Matrix x = Images(5, 64, 13);
  CHECK(LatentFeatures(m, x, LatentSource::kMu, 0).cols() == 3);
  CHECK(LatentFeatures(m, x, LatentSource::kMuLogVar, 0).cols() == 6);
  const Matrix z1 = LatentFeatures(m, x, LatentSource::kReparameterized, 1);
  const Matrix z2 = LatentFeatures(m, x, LatentSource::kReparameterized, 2);
  CHECK(z1.cols() == 3);
  CHECK_FALSE(z1 == z2);
}

}  // namespace
}  // namespace jamcomp
