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

#ifndef JAMCOMP_NN_AE_MODEL_H_
#define JAMCOMP_NN_AE_MODEL_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "common/matrix.h"
#include "json.hpp"
#include "nn/layers.h"

namespace jamcomp {

enum class LayerKind { kDense, kConv1d };

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int in = 0;
  int out = 0;
  int in_ch = 0;
  int in_len = 0;
  int out_ch = 0;
  int kernel = 0;
  int stride = 1;
  Activation activation = Activation::kReLU;

  static LayerSpec MakeDense(int in, int out, Activation act);
  static LayerSpec MakeConv1d(int in_ch, int in_len, int out_ch, int kernel, int stride,
                              Activation act);
  int in_dim() const;
  int out_dim() const;
  int out_len() const;
  long NumParams() const;
  long Macs() const;
  void Validate() const;

  nlohmann::json ToJson() const;
  static LayerSpec FromJson(const nlohmann::json& j);
};

// Dense specs for input -> widths... -> latent and the mirrored decoder
// latent -> reversed widths -> input. Hidden layers use ReLU, the latent and
// output layers are linear.
std::vector<LayerSpec> DenseEncoderSpecs(int input_dim, const std::vector<int>& widths,
                                         int latent_dim);
std::vector<LayerSpec> DenseDecoderSpecs(int input_dim, const std::vector<int>& widths,
                                         int latent_dim);

// Autoencoder with an optional variational bottleneck. For a plain AE the
// last encoder layer produces the latent code; for a VAE the encoder is a
// trunk feeding separate mu and log-variance dense heads.
class AeModel {
 public:
  AeModel(std::vector<LayerSpec> encoder, std::vector<LayerSpec> decoder, int latent_dim,
          bool variational, uint64_t seed);

  int input_dim() const { return input_dim_; }
  int latent_dim() const { return latent_dim_; }
  bool variational() const { return variational_; }
  const std::vector<LayerSpec>& encoder_specs() const { return encoder_specs_; }
  const std::vector<LayerSpec>& decoder_specs() const { return decoder_specs_; }

  struct Output {
    Matrix reconstruction;
    Matrix latent;  // mu for a VAE
    Matrix mu;
    Matrix logvar;  // clamped; empty for a plain AE
  };

  // Deterministic inference (a VAE decodes its mean).
  Output Infer(const Matrix& x) const;
  Matrix Encode(const Matrix& x) const;
  Matrix Decode(const Matrix& z) const;

  struct LossParts {
    double total = 0.0;
    double mse = 0.0;
    double kl = 0.0;
  };

  // Training objective: MSE, plus kl_weight * Gaussian KL for a VAE (with
  // reparameterization noise from noise_seed).
  LossParts Evaluate(const Matrix& x, uint64_t noise_seed, double kl_weight = 1.0) const;
  // Same objective; accumulates gradients into Params().
  LossParts ForwardBackward(const Matrix& x, uint64_t noise_seed, double kl_weight = 1.0);

  std::vector<Param*> Params();
  std::vector<const Param*> Params() const;
  void ZeroGrad();
  // Rounds every parameter to the nearest float so the f32 model file
  // round-trips exactly.
  void RoundToFloat();

  // Affine stages of the deterministic path in execution order: encoder,
  // mu head (VAE only), decoder.
  struct Stage {
    LayerSpec spec;
    const Param* weight;
    const Param* bias;
  };
  std::vector<Stage> InferenceStages() const;

  long NumParams() const;
  long Macs() const;

  nlohmann::json Descriptor() const;
  static AeModel FromDescriptor(const nlohmann::json& j);

  // Free-form provenance: norm stats, training scenario ids, arch label.
  nlohmann::json metadata = nlohmann::json::object();

 private:
  struct Built {
    Sequential net;
    std::vector<int> affine_index;  // position of each spec's layer in net
  };
  static Built Build(const std::vector<LayerSpec>& specs, Rng& rng);
  const Param* LayerParam(const Built& b, size_t spec_index, int which) const;

  std::vector<LayerSpec> encoder_specs_;
  std::vector<LayerSpec> decoder_specs_;
  int input_dim_ = 0;
  int latent_dim_ = 0;
  bool variational_ = false;
  Built encoder_;
  Built decoder_;
  std::optional<Dense> mu_head_;
  std::optional<Dense> logvar_head_;
};

}  // namespace jamcomp

#endif  // JAMCOMP_NN_AE_MODEL_H_
