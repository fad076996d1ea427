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

#include "nn/ae_model.h"

#include <cmath>

#include "common/error.h"
#include "nn/losses.h"

namespace jamcomp {

using nlohmann::json;

LayerSpec LayerSpec::MakeDense(int in, int out, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.in = in;
  s.out = out;
  s.activation = act;
  return s;
}

LayerSpec LayerSpec::MakeConv1d(int in_ch, int in_len, int out_ch, int kernel, int stride,
                                Activation act) {
  LayerSpec s;
  s.kind = LayerKind::kConv1d;
  s.in_ch = in_ch;
  s.in_len = in_len;
  s.out_ch = out_ch;
  s.kernel = kernel;
  s.stride = stride;
  s.activation = act;
  return s;
}

int LayerSpec::in_dim() const { return kind == LayerKind::kDense ? in : in_ch * in_len; }

int LayerSpec::out_len() const { return Conv1d::OutputLength(in_len, kernel, stride); }

int LayerSpec::out_dim() const {
  return kind == LayerKind::kDense ? out : out_ch * out_len();
}

long LayerSpec::NumParams() const {
  if (kind == LayerKind::kDense) return static_cast<long>(in) * out + out;
  return static_cast<long>(in_ch) * out_ch * kernel + out_ch;
}

long LayerSpec::Macs() const {
  if (kind == LayerKind::kDense) return static_cast<long>(in) * out;
  return static_cast<long>(out_ch) * out_len() * in_ch * kernel;
}

void LayerSpec::Validate() const {
  if (kind == LayerKind::kDense) {
    Require(in > 0 && out > 0, ErrorCode::kInvalidSpec, "dense dimensions must be positive");
  } else {
    Require(in_ch > 0 && in_len > 0 && out_ch > 0 && kernel > 0, ErrorCode::kInvalidSpec,
            "conv1d dimensions must be positive");
    Require(stride == 1 || stride == 2, ErrorCode::kInvalidSpec,
            "conv1d stride must be 1 or 2");
  }
  Require(activation != Activation::kLeakyReLU, ErrorCode::kInvalidSpec,
          "autoencoder layers use relu, linear or sigmoid");
}

json LayerSpec::ToJson() const {
  if (kind == LayerKind::kDense) {
    return json{{"kind", "dense"}, {"in", in}, {"out", out},
                {"activation", ActivationName(activation)}};
  }
  return json{{"kind", "conv1d"}, {"in_ch", in_ch}, {"in_len", in_len},
              {"out_ch", out_ch}, {"kernel", kernel}, {"stride", stride},
              {"activation", ActivationName(activation)}};
}

LayerSpec LayerSpec::FromJson(const json& j) {
  try {
    const auto act = ParseActivation(j.at("activation").get<std::string>());
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "dense") return MakeDense(j.at("in"), j.at("out"), act);
    if (kind == "conv1d") {
      return MakeConv1d(j.at("in_ch"), j.at("in_len"), j.at("out_ch"), j.at("kernel"),
                        j.at("stride"), act);
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad layer spec: ") + e.what());
  }
  Fail(ErrorCode::kFormat, "unknown layer kind in " + j.dump());
}

std::vector<LayerSpec> DenseEncoderSpecs(int input_dim, const std::vector<int>& widths,
                                         int latent_dim) {
  std::vector<LayerSpec> specs;
  int prev = input_dim;
  for (int w : widths) {
    specs.push_back(LayerSpec::MakeDense(prev, w, Activation::kReLU));
    prev = w;
  }
  specs.push_back(LayerSpec::MakeDense(prev, latent_dim, Activation::kLinear));
  return specs;
}

std::vector<LayerSpec> DenseDecoderSpecs(int input_dim, const std::vector<int>& widths,
                                         int latent_dim) {
  std::vector<LayerSpec> specs;
  int prev = latent_dim;
  for (auto it = widths.rbegin(); it != widths.rend(); ++it) {
    specs.push_back(LayerSpec::MakeDense(prev, *it, Activation::kReLU));
    prev = *it;
  }
  specs.push_back(LayerSpec::MakeDense(prev, input_dim, Activation::kLinear));
  return specs;
}

AeModel::Built AeModel::Build(const std::vector<LayerSpec>& specs, Rng& rng) {
  Built b;
  for (const auto& s : specs) {
    s.Validate();
    const double gain = s.activation == Activation::kReLU ? std::sqrt(2.0) : 1.0;
    b.affine_index.push_back(static_cast<int>(b.net.size()));
    if (s.kind == LayerKind::kDense) {
      Dense d(s.in, s.out);
      d.Init(rng, gain);
      b.net.Add(std::move(d));
    } else {
      Conv1d c(s.in_ch, s.in_len, s.out_ch, s.kernel, s.stride);
      c.Init(rng, gain);
      b.net.Add(std::move(c));
    }
    if (s.activation != Activation::kLinear) {
      b.net.Add(ActivationLayer(s.activation, s.out_dim()));
    }
  }
  return b;
}

AeModel::AeModel(std::vector<LayerSpec> encoder, std::vector<LayerSpec> decoder,
                 int latent_dim, bool variational, uint64_t seed)
    : encoder_specs_(std::move(encoder)),
      decoder_specs_(std::move(decoder)),
      latent_dim_(latent_dim),
      variational_(variational) {
  Require(!encoder_specs_.empty() && !decoder_specs_.empty(), ErrorCode::kInvalidSpec,
          "encoder and decoder need at least one layer");
  Require(latent_dim > 0, ErrorCode::kInvalidSpec, "latent dimension must be positive");
  for (size_t i = 1; i < encoder_specs_.size(); ++i) {
    Require(encoder_specs_[i].in_dim() == encoder_specs_[i - 1].out_dim(),
            ErrorCode::kShape, "encoder layers do not chain");
  }
  for (size_t i = 1; i < decoder_specs_.size(); ++i) {
    Require(decoder_specs_[i].in_dim() == decoder_specs_[i - 1].out_dim(),
            ErrorCode::kShape, "decoder layers do not chain");
  }
  input_dim_ = encoder_specs_.front().in_dim();
  const int trunk_out = encoder_specs_.back().out_dim();
  Require(decoder_specs_.front().in_dim() == latent_dim, ErrorCode::kShape,
          "decoder input must equal the latent dimension");
  Require(decoder_specs_.back().out_dim() == input_dim_, ErrorCode::kShape,
          "decoder output must equal the encoder input");
  if (!variational) {
    Require(trunk_out == latent_dim, ErrorCode::kShape,
            "encoder output must equal the latent dimension");
  }
  Rng rng(seed);
  encoder_ = Build(encoder_specs_, rng);
  if (variational) {
    mu_head_.emplace(trunk_out, latent_dim);
    mu_head_->Init(rng, 1.0);
    logvar_head_.emplace(trunk_out, latent_dim);
    logvar_head_->Init(rng, 0.1);
  }
  decoder_ = Build(decoder_specs_, rng);
}

AeModel::Output AeModel::Infer(const Matrix& x) const {
  Require(x.cols() == input_dim_, ErrorCode::kShape,
          "model expects " + std::to_string(input_dim_) + " inputs, got " +
              std::to_string(x.cols()));
  Output out;
  Matrix h = encoder_.net.Apply(x);
  if (variational_) {
    out.mu = mu_head_->Apply(h);
    out.logvar = logvar_head_->Apply(h);
    for (double& v : out.logvar.data()) v = ClampLogVar(v);
    out.latent = out.mu;
  } else {
    out.latent = h;
    out.mu = h;
  }
  out.reconstruction = decoder_.net.Apply(out.latent);
  return out;
}

Matrix AeModel::Encode(const Matrix& x) const { return Infer(x).latent; }

Matrix AeModel::Decode(const Matrix& z) const {
  Require(z.cols() == latent_dim_, ErrorCode::kShape, "latent dimension mismatch");
  return decoder_.net.Apply(z);
}

AeModel::LossParts AeModel::Evaluate(const Matrix& x, uint64_t noise_seed,
                                     double kl_weight) const {
  Require(x.cols() == input_dim_, ErrorCode::kShape, "input dimension mismatch");
  LossParts parts;
  Matrix h = encoder_.net.Apply(x);
  if (!variational_) {
    parts.mse = MseLoss(x, decoder_.net.Apply(h));
    parts.total = parts.mse;
    return parts;
  }
  const Matrix mu = mu_head_->Apply(h);
  Matrix lv = logvar_head_->Apply(h);
  for (double& v : lv.data()) v = ClampLogVar(v);
  const Matrix z = Reparameterize(mu, lv, noise_seed);
  parts.mse = MseLoss(x, decoder_.net.Apply(z));
  parts.kl = GaussianKl(mu, lv);
  parts.total = parts.mse + kl_weight * parts.kl;
  return parts;
}

AeModel::LossParts AeModel::ForwardBackward(const Matrix& x, uint64_t noise_seed,
                                            double kl_weight) {
  Require(x.cols() == input_dim_, ErrorCode::kShape, "input dimension mismatch");
  LossParts parts;
  Matrix h = encoder_.net.Forward(x);
  if (!variational_) {
    const Matrix recon = decoder_.net.Forward(h);
    parts.mse = MseLoss(x, recon);
    parts.total = parts.mse;
    encoder_.net.Backward(decoder_.net.Backward(MseGrad(x, recon)));
    return parts;
  }
  const Matrix mu = mu_head_->Forward(h);
  const Matrix lv_raw = logvar_head_->Forward(h);
  Matrix lv = lv_raw;
  for (double& v : lv.data()) v = ClampLogVar(v);
  Matrix noise;
  const Matrix z = Reparameterize(mu, lv, noise_seed, &noise);
  const Matrix recon = decoder_.net.Forward(z);
  parts.mse = MseLoss(x, recon);
  parts.kl = GaussianKl(mu, lv);
  parts.total = parts.mse + kl_weight * parts.kl;

  const Matrix g_z = decoder_.net.Backward(MseGrad(x, recon));
  const KlGrads kl = GaussianKlGrad(mu, lv);
  Matrix g_mu(mu.rows(), mu.cols());
  Matrix g_lv(mu.rows(), mu.cols());
  for (size_t i = 0; i < mu.size(); ++i) {
    g_mu.data()[i] = g_z.data()[i] + kl_weight * kl.d_mu.data()[i];
    const double raw = lv_raw.data()[i];
    const bool inside = raw > kLogVarMin && raw < kLogVarMax;
    const double sigma = std::exp(0.5 * lv.data()[i]);
    g_lv.data()[i] = inside ? g_z.data()[i] * noise.data()[i] * 0.5 * sigma +
                                  kl_weight * kl.d_logvar.data()[i]
                            : 0.0;
  }
  Matrix g_h = mu_head_->Backward(g_mu);
  const Matrix g_h2 = logvar_head_->Backward(g_lv);
  for (size_t i = 0; i < g_h.size(); ++i) g_h.data()[i] += g_h2.data()[i];
  encoder_.net.Backward(g_h);
  return parts;
}

std::vector<Param*> AeModel::Params() {
  std::vector<Param*> out = encoder_.net.Params();
  if (variational_) {
    for (Param* p : mu_head_->Params()) out.push_back(p);
    for (Param* p : logvar_head_->Params()) out.push_back(p);
  }
  for (Param* p : decoder_.net.Params()) out.push_back(p);
  return out;
}

std::vector<const Param*> AeModel::Params() const {
  std::vector<const Param*> out = encoder_.net.Params();
  if (variational_) {
    for (const Param* p : static_cast<const Dense&>(*mu_head_).Params()) out.push_back(p);
    for (const Param* p : static_cast<const Dense&>(*logvar_head_).Params()) out.push_back(p);
  }
  for (const Param* p : decoder_.net.Params()) out.push_back(p);
  return out;
}

void AeModel::ZeroGrad() {
  for (Param* p : Params()) p->ZeroGrad();
}

void AeModel::RoundToFloat() {
  for (Param* p : Params()) {
    for (double& v : p->value) v = static_cast<double>(static_cast<float>(v));
  }
}

const Param* AeModel::LayerParam(const Built& b, size_t spec_index, int which) const {
  const Layer& layer = b.net.at(b.affine_index[spec_index]);
  return layer.Params()[which];
}

std::vector<AeModel::Stage> AeModel::InferenceStages() const {
  std::vector<Stage> stages;
  for (size_t i = 0; i < encoder_specs_.size(); ++i) {
    stages.push_back({encoder_specs_[i], LayerParam(encoder_, i, 0), LayerParam(encoder_, i, 1)});
  }
  if (variational_) {
    stages.push_back({LayerSpec::MakeDense(mu_head_->in_dim(), latent_dim_, Activation::kLinear),
                      &mu_head_->weight(), &mu_head_->bias()});
  }
  for (size_t i = 0; i < decoder_specs_.size(); ++i) {
    stages.push_back({decoder_specs_[i], LayerParam(decoder_, i, 0), LayerParam(decoder_, i, 1)});
  }
  return stages;
}

long AeModel::NumParams() const {
  long n = 0;
  for (const Param* p : Params()) n += static_cast<long>(p->value.size());
  return n;
}

long AeModel::Macs() const {
  long n = encoder_.net.Macs() + decoder_.net.Macs();
  if (variational_) n += mu_head_->Macs() + logvar_head_->Macs();
  return n;
}

json AeModel::Descriptor() const {
  json enc = json::array(), dec = json::array();
  for (const auto& s : encoder_specs_) enc.push_back(s.ToJson());
  for (const auto& s : decoder_specs_) dec.push_back(s.ToJson());
  return json{{"encoder", enc}, {"decoder", dec}, {"latent_dim", latent_dim_},
              {"variational", variational_}};
}

AeModel AeModel::FromDescriptor(const json& j) {
  std::vector<LayerSpec> enc, dec;
  try {
    for (const auto& s : j.at("encoder")) enc.push_back(LayerSpec::FromJson(s));
    for (const auto& s : j.at("decoder")) dec.push_back(LayerSpec::FromJson(s));
    return AeModel(std::move(enc), std::move(dec), j.at("latent_dim").get<int>(),
                   j.at("variational").get<bool>(), 0);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad model descriptor: ") + e.what());
  }
}

}  // namespace jamcomp
