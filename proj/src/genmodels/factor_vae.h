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

#ifndef JAMCOMP_GENMODELS_FACTOR_VAE_H_
#define JAMCOMP_GENMODELS_FACTOR_VAE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "common/matrix.h"
#include "json.hpp"
#include "nn/adam.h"
#include "nn/layers.h"
#include "synth/dataset.h"
#include "synth/signal_synth.h"

namespace jamcomp {

// Time x frequency log-power image scaled to [0, 1] per image: rows are
// consecutive frames, columns are fftshifted frequency groups.
std::vector<double> Spectrogram(const IqBuffer& iq, int rows = 32, int cols = 32);
Matrix SpectrogramImages(const std::vector<LabeledSnapshot>& snapshots, int rows = 32,
                         int cols = 32);

// Zero-pads an h x w image to a square of side max(h, w), image top-left.
std::vector<double> PadToSquare(std::span<const double> image, int h, int w, int* side);

enum class EncoderKind { kSmallConv, kDeepResidual };
enum class ReconReduction { kSumPerSample, kMeanElement };

const char* EncoderKindName(EncoderKind k);
EncoderKind ParseEncoderKind(const std::string& name);

struct FactorVaeConfig {
  int image_size = 32;
  int latent_dim = 8;
  double tc_weight = 6.4;
  int epochs = 250;
  // Small batches give more VAE steps at the fixed learning rate.
  int batch_size = 8;
  AdamConfig vae_adam{1e-4, 0.9, 0.999, 1e-8};
  AdamConfig disc_adam{1e-5, 0.5, 0.9, 1e-8};
  EncoderKind encoder = EncoderKind::kSmallConv;
  ReconReduction recon = ReconReduction::kSumPerSample;
  // Multiplies the reconstruction term; 1/(2 sigma^2) for a Gaussian decoder
  // of variance sigma^2 under the per-sample sum. The default 10 is
  // sigma^2 = 0.05, about the pixel noise of the desk spectrograms.
  double recon_weight = 10.0;
  int disc_width = 256;
  int disc_layers = 4;
  uint64_t seed = 0;

  void Validate() const;
  nlohmann::json ToJson() const;
  static FactorVaeConfig FromJson(const nlohmann::json& j);
};

// Each column is permuted across the batch with its own permutation drawn
// from Rng(MixSeed(seed, column)).
Matrix PermuteDims(const Matrix& z, uint64_t seed);

// MLP latent -> 2 logits (0: joint sample, 1: permuted sample) with leaky
// ReLU between layers.
Sequential MakeDiscriminator(int latent_dim, int width, int layers, Rng& rng);

struct TcResult {
  double disc_loss = 0.0;       // mean CE over the 2B stacked samples
  double generator_term = 0.0;  // gamma * mean(logit0 - logit1) on z_true
};
TcResult TcLoss(const Sequential& disc, const Matrix& z_true, const Matrix& z_perm,
                double gamma);
// Same disc_loss; accumulates the discriminator's parameter gradients.
double DiscriminatorLossBackward(Sequential& disc, const Matrix& z_true, const Matrix& z_perm);

class FactorVae {
 public:
  explicit FactorVae(const FactorVaeConfig& config);

  const FactorVaeConfig& config() const { return config_; }
  int image_dim() const { return config_.image_size * config_.image_size; }
  int latent_dim() const { return config_.latent_dim; }

  struct Encoded {
    Matrix mu;
    Matrix logvar;  // clamped
  };
  Encoded Encode(const Matrix& x) const;
  Matrix Decode(const Matrix& z) const;
  Matrix Reconstruct(const Matrix& x) const;  // decodes mu

  struct Loss {
    double total = 0.0;
    double recon = 0.0;      // as optimized (per configured reduction)
    double recon_mse = 0.0;  // mean per element
    double kl = 0.0;
    double tc = 0.0;         // mean(logit0 - logit1), before gamma
    Matrix z;
  };
  // Accumulates gradients of recon + KL (+ gamma * TC when use_discriminator)
  // into VaeParams(). Discriminator gradients are left zeroed.
  Loss VaeForwardBackward(const Matrix& x, uint64_t noise_seed, bool use_discriminator = true);

  struct StepStats {
    Loss vae;
    double disc_loss = 0.0;
  };
  // One VAE update followed by one discriminator update on the same batch.
  StepStats TrainStep(const Matrix& x, uint64_t noise_seed, uint64_t perm_seed);

  std::vector<Param*> VaeParams();
  std::vector<const Param*> VaeParams() const;
  void ZeroVaeGrad();
  Sequential& discriminator() { return disc_; }
  const Sequential& discriminator() const { return disc_; }
  long NumParams() const;

  void Save(const std::filesystem::path& path) const;
  static FactorVae Load(const std::filesystem::path& path);

 private:
  FactorVaeConfig config_;
  Sequential encoder_;
  Dense mu_head_;
  Dense logvar_head_;
  Sequential decoder_;
  Sequential disc_;
  Adam vae_opt_;
  Adam disc_opt_;
};

struct FactorVaeEpoch {
  int epoch = 0;
  double recon_mse = 0.0;
  double kl = 0.0;
  double tc = 0.0;
  double disc_loss = 0.0;
};

struct FactorVaeResult {
  FactorVae model;
  std::vector<FactorVaeEpoch> history;
};

// Images are rows of image_size^2 values. Throws kDiverged on a non-finite
// loss, naming the epoch.
FactorVaeResult TrainFactorVae(const FactorVaeConfig& config, const Matrix& images);

// Decodes (1 - t) * mu_a + t * mu_b for t evenly spaced over [0, 1].
Matrix Interpolate(const FactorVae& model, std::span<const double> x_a,
                   std::span<const double> x_b, int steps);

// Images side by side as one binary PGM.
void WritePgmStrip(const std::filesystem::path& path, const Matrix& images, int h, int w);

enum class InterOp { kBatchNorm, kReLU };
enum class LatentSource { kMu, kMuLogVar, kReparameterized };

const char* InterOpName(InterOp op);
const char* LatentSourceName(LatentSource s);

struct HeadSpec {
  int n_linear = 1;
  InterOp inter_op = InterOp::kReLU;
  LatentSource source = LatentSource::kMu;
  int hidden = 32;

  void Validate() const;
  std::string Name() const;
};

struct HeadTrainConfig {
  int epochs = 150;
  int batch_size = 32;
  double learning_rate = 1e-3;
  uint64_t seed = 0;
};

Sequential BuildHead(const HeadSpec& spec, int in_dim, int n_classes, Rng& rng);

struct HeadResult {
  double accuracy = 0.0;
  double f2 = 0.0;
  std::vector<int> predictions;
};

// Classifier head trained with softmax cross-entropy on fixed features.
// resample, when set, replaces the training features at every epoch.
HeadResult TrainHeadOnFeatures(const Matrix& train_x, std::span<const int> train_y,
                               const Matrix& test_x, std::span<const int> test_y,
                               int n_classes, const HeadSpec& spec, const HeadTrainConfig& cfg,
                               const std::function<Matrix(int epoch)>& resample = {});

// Latent inputs for a head: mu, [mu | logvar], or a reparameterized draw.
Matrix LatentFeatures(const FactorVae& model, const Matrix& images, LatentSource source,
                      uint64_t seed);

HeadResult TrainLatentHead(const FactorVae& model, const Matrix& train_images,
                           std::span<const int> train_y, const Matrix& test_images,
                           std::span<const int> test_y, int n_classes, const HeadSpec& spec,
                           const HeadTrainConfig& cfg);

struct AblationRow {
  HeadSpec head;
  EncoderKind encoder = EncoderKind::kSmallConv;
  int latent_dim = 0;
  uint64_t seed = 0;
  double accuracy = 0.0;
  double f2 = 0.0;
};

// Every head in the grid (depth 1-3 x inter-op x source) on one model.
std::vector<HeadSpec> DefaultHeadGrid();
std::vector<AblationRow> RunHeadAblation(const FactorVae& model, const Matrix& train_images,
                                         std::span<const int> train_y,
                                         const Matrix& test_images, std::span<const int> test_y,
                                         int n_classes, const std::vector<HeadSpec>& grid,
                                         const HeadTrainConfig& cfg);
void WriteAblationCsv(const std::filesystem::path& path, const std::vector<AblationRow>& rows);

}  // namespace jamcomp

#endif  // JAMCOMP_GENMODELS_FACTOR_VAE_H_
