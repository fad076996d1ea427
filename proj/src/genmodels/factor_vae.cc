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

#include "genmodels/factor_vae.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "classify/metrics.h"
#include "common/binary_io.h"
#include "common/error.h"
#include "common/parallel.h"
#include "common/rng.h"
#include "features/fft.h"
#include "nn/losses.h"

namespace jamcomp {

using nlohmann::json;

namespace {

constexpr char kFactorVaeMagic[5] = "FVA1";
constexpr uint32_t kFactorVaeVersion = 1;

Matrix StackRows(const Matrix& a, const Matrix& b) {
  Require(a.cols() == b.cols(), ErrorCode::kShape, "cannot stack matrices of different widths");
  Matrix out(a.rows() + b.rows(), a.cols());
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + a.size());
  return out;
}

void AddInPlace(Matrix& a, const Matrix& b) {
  for (size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

void AppendParams(std::vector<Param*>& out, std::vector<Param*> more) {
  out.insert(out.end(), more.begin(), more.end());
}

Sequential BuildEncoder(const FactorVaeConfig& c, Rng& rng) {
  const double relu_gain = std::sqrt(2.0);
  Sequential enc;
  const int s = c.image_size;
  auto conv = [&](int in_ch, int side, int out_ch) -> Conv2d& {
    Conv2d& layer = enc.Add(Conv2d(in_ch, side, side, out_ch, 3, 2));
    layer.Init(rng, relu_gain);
    enc.Add(ActivationLayer(Activation::kReLU, layer.out_dim()));
    return layer;
  };
  if (c.encoder == EncoderKind::kSmallConv) {
    conv(1, s, 8);
    conv(8, s / 2, 16);
    conv(16, s / 4, 32);
  } else {
    const Conv2d& stem = conv(1, s, 8);
    for (int i = 0; i < 4; ++i) enc.Add(ResidualBlock(8, stem.out_h(), stem.out_w(), rng));
    conv(8, s / 2, 16);
  }
  return enc;
}

Sequential BuildDecoder(const FactorVaeConfig& c, Rng& rng) {
  Sequential dec;
  dec.Add(Dense(c.latent_dim, 256)).Init(rng, std::sqrt(2.0));
  dec.Add(ActivationLayer(Activation::kReLU, 256));
  dec.Add(Dense(256, c.image_size * c.image_size)).Init(rng, 1.0);
  dec.Add(ActivationLayer(Activation::kSigmoid, c.image_size * c.image_size));
  return dec;
}

int FlatDim(const FactorVaeConfig& c) {
  const int quarter = c.image_size / 4;
  return c.encoder == EncoderKind::kSmallConv ? 32 * (c.image_size / 8) * (c.image_size / 8)
                                              : 16 * quarter * quarter;
}

std::vector<int> ArgmaxRows(const Matrix& logits) {
  std::vector<int> out(logits.rows());
  for (int b = 0; b < logits.rows(); ++b) {
    const auto r = logits.row(b);
    out[b] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

}  // namespace

std::vector<double> Spectrogram(const IqBuffer& iq, int rows, int cols) {
  Require(rows > 0 && cols > 0, ErrorCode::kInvalidArgument, "spectrogram needs a positive size");
  const long n = static_cast<long>(iq.samples.size());
  const long frame = n / rows;
  Require(frame >= cols && IsPowerOfTwo(frame) && frame % cols == 0,
          ErrorCode::kInsufficientSamples,
          "spectrogram frames must be a power of two and a multiple of the column count");
  const long group = frame / cols;
  std::vector<double> window(frame);
  for (long k = 0; k < frame; ++k) {
    window[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / frame);
  }
  std::vector<double> img(static_cast<size_t>(rows) * cols, 0.0);
  std::vector<std::complex<double>> buf(frame);
  for (int r = 0; r < rows; ++r) {
    for (long k = 0; k < frame; ++k) buf[k] = iq.samples[r * frame + k] * window[k];
    const auto spec = Fft(buf);
    double* row = &img[static_cast<size_t>(r) * cols];
    for (long m = 0; m < frame; ++m) {
      const long shifted = (m + frame / 2) % frame;
      row[shifted / group] += std::norm(spec[m]);
    }
    for (int c = 0; c < cols; ++c) row[c] = 10.0 * std::log10(row[c] + 1e-12);
  }
  const auto [lo, hi] = std::minmax_element(img.begin(), img.end());
  const double min = *lo, span = *hi - *lo;
  for (double& v : img) v = span > 0.0 ? (v - min) / span : 0.0;
  return img;
}

Matrix SpectrogramImages(const std::vector<LabeledSnapshot>& snapshots, int rows, int cols) {
  Matrix out(static_cast<int>(snapshots.size()), rows * cols);
  ParallelFor(static_cast<int>(snapshots.size()), [&](int i) {
    const auto img = Spectrogram(snapshots[i].iq, rows, cols);
    std::copy(img.begin(), img.end(), out.row(i).begin());
  });
  return out;
}

std::vector<double> PadToSquare(std::span<const double> image, int h, int w, int* side) {
  Require(h > 0 && w > 0 && image.size() == static_cast<size_t>(h) * w, ErrorCode::kShape,
          "image size does not match its shape");
  const int s = std::max(h, w);
  std::vector<double> out(static_cast<size_t>(s) * s, 0.0);
  for (int r = 0; r < h; ++r) {
    std::copy(image.begin() + static_cast<long>(r) * w, image.begin() + static_cast<long>(r + 1) * w,
              out.begin() + static_cast<long>(r) * s);
  }
  if (side) *side = s;
  return out;
}

const char* EncoderKindName(EncoderKind k) {
  return k == EncoderKind::kSmallConv ? "small-conv" : "deep-residual";
}

EncoderKind ParseEncoderKind(const std::string& name) {
  if (name == "small-conv") return EncoderKind::kSmallConv;
  if (name == "deep-residual") return EncoderKind::kDeepResidual;
  Fail(ErrorCode::kInvalidSpec, "unknown encoder kind '" + name + "'");
}

void FactorVaeConfig::Validate() const {
  Require(image_size >= 8 && image_size % 8 == 0, ErrorCode::kInvalidSpec,
          "image size must be a positive multiple of 8");
  Require(latent_dim >= 1, ErrorCode::kInvalidSpec, "latent dimension must be positive");
  Require(std::isfinite(tc_weight) && tc_weight >= 0.0, ErrorCode::kInvalidSpec,
          "tc weight must be non-negative");
  Require(epochs >= 1 && batch_size >= 1, ErrorCode::kInvalidSpec,
          "epochs and batch size must be positive");
  Require(std::isfinite(recon_weight) && recon_weight > 0.0, ErrorCode::kInvalidSpec,
          "recon weight must be positive");
  Require(vae_adam.lr > 0 && disc_adam.lr > 0, ErrorCode::kInvalidSpec,
          "learning rates must be positive");
  Require(disc_width >= 1 && disc_layers >= 1, ErrorCode::kInvalidSpec,
          "discriminator needs at least one layer");
}

json FactorVaeConfig::ToJson() const {
  auto adam = [](const AdamConfig& a) {
    return json{{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
  };
  return json{{"image_size", image_size},
              {"latent_dim", latent_dim},
              {"tc_weight", tc_weight},
              {"epochs", epochs},
              {"batch_size", batch_size},
              {"vae_adam", adam(vae_adam)},
              {"disc_adam", adam(disc_adam)},
              {"encoder", EncoderKindName(encoder)},
              {"recon", recon == ReconReduction::kSumPerSample ? "sum" : "mean"},
              {"recon_weight", recon_weight},
              {"disc_width", disc_width},
              {"disc_layers", disc_layers},
              {"seed", seed}};
}

FactorVaeConfig FactorVaeConfig::FromJson(const json& j) {
  FactorVaeConfig c;
  auto adam = [&](const char* key, AdamConfig a) {
    if (!j.contains(key)) return a;
    const auto& o = j[key];
    return AdamConfig{o.value("lr", a.lr), o.value("beta1", a.beta1), o.value("beta2", a.beta2),
                      o.value("eps", a.eps)};
  };
  try {
    c.image_size = j.value("image_size", c.image_size);
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.tc_weight = j.value("tc_weight", c.tc_weight);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.vae_adam = adam("vae_adam", c.vae_adam);
    c.disc_adam = adam("disc_adam", c.disc_adam);
    c.encoder = ParseEncoderKind(j.value("encoder", std::string(EncoderKindName(c.encoder))));
    const std::string recon = j.value("recon", std::string("sum"));
    Require(recon == "sum" || recon == "mean", ErrorCode::kInvalidSpec,
            "recon must be sum or mean");
    c.recon = recon == "sum" ? ReconReduction::kSumPerSample : ReconReduction::kMeanElement;
    c.recon_weight = j.value("recon_weight", c.recon_weight);
    c.disc_width = j.value("disc_width", c.disc_width);
    c.disc_layers = j.value("disc_layers", c.disc_layers);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidSpec, std::string("bad factor-vae config: ") + e.what());
  }
  c.Validate();
  return c;
}

Matrix PermuteDims(const Matrix& z, uint64_t seed) {
  Matrix out(z.rows(), z.cols());
  for (int j = 0; j < z.cols(); ++j) {
    Rng rng(MixSeed(seed, static_cast<uint64_t>(j)));
    const auto perm = rng.Permutation(z.rows());
    for (int i = 0; i < z.rows(); ++i) out(i, j) = z(perm[i], j);
  }
  return out;
}

Sequential MakeDiscriminator(int latent_dim, int width, int layers, Rng& rng) {
  Sequential d;
  int prev = latent_dim;
  for (int i = 0; i + 1 < layers; ++i) {
    d.Add(Dense(prev, width)).Init(rng, std::sqrt(2.0 / (1.0 + 0.2 * 0.2)));
    d.Add(ActivationLayer(Activation::kLeakyReLU, width, 0.2));
    prev = width;
  }
  d.Add(Dense(prev, 2)).Init(rng, 1.0);
  return d;
}

TcResult TcLoss(const Sequential& disc, const Matrix& z_true, const Matrix& z_perm,
                double gamma) {
  Require(z_true.rows() == z_perm.rows() && z_true.rows() > 0, ErrorCode::kShape,
          "true and permuted batches must have the same non-zero size");
  const Matrix logits = disc.Apply(StackRows(z_true, z_perm));
  std::vector<int> labels(logits.rows(), 0);
  std::fill(labels.begin() + z_true.rows(), labels.end(), 1);
  TcResult r;
  r.disc_loss = SoftmaxCrossEntropy(logits, labels).loss;
  double s = 0.0;
  for (int b = 0; b < z_true.rows(); ++b) s += logits(b, 0) - logits(b, 1);
  r.generator_term = gamma * s / z_true.rows();
  return r;
}

double DiscriminatorLossBackward(Sequential& disc, const Matrix& z_true, const Matrix& z_perm) {
  Require(z_true.rows() == z_perm.rows() && z_true.rows() > 0, ErrorCode::kShape,
          "true and permuted batches must have the same non-zero size");
  const Matrix logits = disc.Forward(StackRows(z_true, z_perm));
  std::vector<int> labels(logits.rows(), 0);
  std::fill(labels.begin() + z_true.rows(), labels.end(), 1);
  const auto ce = SoftmaxCrossEntropy(logits, labels);
  disc.Backward(ce.grad);
  return ce.loss;
}

FactorVae::FactorVae(const FactorVaeConfig& config)
    : config_(config),
      mu_head_(FlatDim(config), config.latent_dim),
      logvar_head_(FlatDim(config), config.latent_dim),
      vae_opt_(config.vae_adam),
      disc_opt_(config.disc_adam) {
  config_.Validate();
  Rng rng(MixSeed(config_.seed, 1));
  encoder_ = BuildEncoder(config_, rng);
  Require(encoder_.out_dim() == FlatDim(config_), ErrorCode::kShape, "encoder width mismatch");
  mu_head_.Init(rng, 1.0);
  logvar_head_.Init(rng, 0.1);
  decoder_ = BuildDecoder(config_, rng);
  Rng disc_rng(MixSeed(config_.seed, 2));
  disc_ = MakeDiscriminator(config_.latent_dim, config_.disc_width, config_.disc_layers,
                            disc_rng);
}

FactorVae::Encoded FactorVae::Encode(const Matrix& x) const {
  Require(x.cols() == image_dim(), ErrorCode::kShape, "image width does not match the model");
  const Matrix h = encoder_.Apply(x);
  Encoded e{mu_head_.Apply(h), logvar_head_.Apply(h)};
  for (double& v : e.logvar.data()) v = ClampLogVar(v);
  return e;
}

Matrix FactorVae::Decode(const Matrix& z) const {
  Require(z.cols() == latent_dim(), ErrorCode::kShape, "latent width does not match the model");
  return decoder_.Apply(z);
}

Matrix FactorVae::Reconstruct(const Matrix& x) const { return Decode(Encode(x).mu); }

FactorVae::Loss FactorVae::VaeForwardBackward(const Matrix& x, uint64_t noise_seed,
                                              bool use_discriminator) {
  Require(x.cols() == image_dim() && x.rows() > 0, ErrorCode::kShape,
          "image batch does not match the model");
  const int batch = x.rows();
  const Matrix h = encoder_.Forward(x);
  const Matrix mu = mu_head_.Forward(h);
  const Matrix lv_raw = logvar_head_.Forward(h);
  Matrix lv = lv_raw;
  for (double& v : lv.data()) v = ClampLogVar(v);
  Matrix noise;
  Loss loss;
  loss.z = Reparameterize(mu, lv, noise_seed, &noise);
  const Matrix recon = decoder_.Forward(loss.z);

  Matrix d_recon(batch, image_dim());
  double se = 0.0;
  for (size_t i = 0; i < recon.size(); ++i) {
    const double d = recon.data()[i] - x.data()[i];
    se += d * d;
    d_recon.data()[i] = 2.0 * d;
  }
  loss.recon_mse = se / static_cast<double>(recon.size());
  const double denom = config_.recon == ReconReduction::kSumPerSample
                           ? static_cast<double>(batch)
                           : static_cast<double>(recon.size());
  loss.recon = config_.recon_weight * se / denom;
  for (double& g : d_recon.data()) g *= config_.recon_weight / denom;

  loss.kl = GaussianKl(mu, lv);
  const auto kl = GaussianKlGrad(mu, lv);
  loss.total = loss.recon + loss.kl;

  Matrix dz = decoder_.Backward(d_recon);
  if (use_discriminator) {
    const Matrix logits = disc_.Forward(loss.z);
    Matrix d_logits(batch, 2);
    double s = 0.0;
    for (int b = 0; b < batch; ++b) {
      s += logits(b, 0) - logits(b, 1);
      d_logits(b, 0) = config_.tc_weight / batch;
      d_logits(b, 1) = -config_.tc_weight / batch;
    }
    loss.tc = s / batch;
    loss.total += config_.tc_weight * loss.tc;
    AddInPlace(dz, disc_.Backward(d_logits));
    disc_.ZeroGrad();
  }

  Matrix d_mu = dz;
  AddInPlace(d_mu, kl.d_mu);
  Matrix d_lv(batch, latent_dim());
  for (size_t i = 0; i < d_lv.size(); ++i) {
    const double raw = lv_raw.data()[i];
    if (raw < kLogVarMin || raw > kLogVarMax) continue;
    d_lv.data()[i] = dz.data()[i] * noise.data()[i] * 0.5 * std::exp(0.5 * lv.data()[i]) +
                     kl.d_logvar.data()[i];
  }
  Matrix dh = mu_head_.Backward(d_mu);
  AddInPlace(dh, logvar_head_.Backward(d_lv));
  encoder_.Backward(dh);
  return loss;
}

FactorVae::StepStats FactorVae::TrainStep(const Matrix& x, uint64_t noise_seed,
                                          uint64_t perm_seed) {
  StepStats s;
  ZeroVaeGrad();
  s.vae = VaeForwardBackward(x, noise_seed, config_.tc_weight > 0.0);
  vae_opt_.Step(VaeParams());
  disc_.ZeroGrad();
  s.disc_loss = DiscriminatorLossBackward(disc_, s.vae.z, PermuteDims(s.vae.z, perm_seed));
  disc_opt_.Step(disc_.Params());
  return s;
}

std::vector<Param*> FactorVae::VaeParams() {
  std::vector<Param*> p = encoder_.Params();
  AppendParams(p, mu_head_.Params());
  AppendParams(p, logvar_head_.Params());
  AppendParams(p, decoder_.Params());
  return p;
}

std::vector<const Param*> FactorVae::VaeParams() const {
  std::vector<const Param*> p;
  for (Param* q : const_cast<FactorVae*>(this)->VaeParams()) p.push_back(q);
  return p;
}

void FactorVae::ZeroVaeGrad() {
  for (Param* p : VaeParams()) p->ZeroGrad();
}

long FactorVae::NumParams() const {
  long n = 0;
  for (const Param* p : VaeParams()) n += static_cast<long>(p->value.size());
  return n;
}

void FactorVae::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  WriteMagic(out, kFactorVaeMagic);
  WritePod<uint32_t>(out, kFactorVaeVersion);
  WriteString(out, config_.ToJson().dump());
  auto blocks = VaeParams();
  for (const Param* p : disc_.Params()) blocks.push_back(p);
  for (const Param* p : blocks) {
    WritePod<uint32_t>(out, static_cast<uint32_t>(p->value.size()));
    for (double v : p->value) WritePod<double>(out, v);
  }
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

FactorVae FactorVae::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  ExpectMagic(in, kFactorVaeMagic);
  const uint32_t version = ReadPod<uint32_t>(in);
  Require(version == kFactorVaeVersion, ErrorCode::kFormat,
          "unsupported factor-vae format version " + std::to_string(version));
  json cfg;
  try {
    cfg = json::parse(ReadString(in));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad factor-vae header: ") + e.what());
  }
  FactorVae model(FactorVaeConfig::FromJson(cfg));
  auto blocks = model.VaeParams();
  for (Param* p : model.disc_.Params()) blocks.push_back(p);
  for (Param* p : blocks) {
    const uint32_t n = ReadPod<uint32_t>(in);
    Require(n == p->value.size(), ErrorCode::kFormat, "parameter blob size mismatch");
    for (double& v : p->value) v = ReadPod<double>(in);
  }
  return model;
}

FactorVaeResult TrainFactorVae(const FactorVaeConfig& config, const Matrix& images) {
  config.Validate();
  Require(images.rows() > 0 && images.cols() == config.image_size * config.image_size,
          ErrorCode::kShape, "images do not match the configured image size");
  FactorVaeResult result{FactorVae(config), {}};
  Rng order_rng(MixSeed(config.seed, 3));
  uint64_t step = 0;
  const int n = images.rows();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = order_rng.Permutation(n);
    FactorVaeEpoch rec;
    rec.epoch = epoch;
    double weight = 0.0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int end = std::min(n, start + config.batch_size);
      const Matrix batch =
          images.SelectRows(std::span<const int>(order.data() + start, end - start));
      const auto s = result.model.TrainStep(batch, MixSeed(config.seed, (4ULL << 32) | step),
                                            MixSeed(config.seed, (5ULL << 32) | step));
      ++step;
      if (!std::isfinite(s.vae.total) || !std::isfinite(s.disc_loss)) {
        Fail(ErrorCode::kDiverged, "factor-vae training diverged in epoch " +
                                       std::to_string(epoch) + "; last finite epoch " +
                                       std::to_string(epoch - 1));
      }
      const double w = end - start;
      rec.recon_mse += w * s.vae.recon_mse;
      rec.kl += w * s.vae.kl;
      rec.tc += w * s.vae.tc;
      rec.disc_loss += w * s.disc_loss;
      weight += w;
    }
    rec.recon_mse /= weight;
    rec.kl /= weight;
    rec.tc /= weight;
    rec.disc_loss /= weight;
    result.history.push_back(rec);
  }
  return result;
}

Matrix Interpolate(const FactorVae& model, std::span<const double> x_a,
                   std::span<const double> x_b, int steps) {
  Require(steps >= 2, ErrorCode::kInvalidArgument, "interpolation needs at least 2 steps");
  Require(x_a.size() == x_b.size(), ErrorCode::kShape, "endpoint images differ in size");
  Matrix pair(2, static_cast<int>(x_a.size()));
  std::copy(x_a.begin(), x_a.end(), pair.row(0).begin());
  std::copy(x_b.begin(), x_b.end(), pair.row(1).begin());
  const Matrix mu = model.Encode(pair).mu;
  Matrix z(steps, mu.cols());
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) / (steps - 1);
    for (int j = 0; j < mu.cols(); ++j) z(k, j) = (1.0 - t) * mu(0, j) + t * mu(1, j);
  }
  return model.Decode(z);
}

void WritePgmStrip(const std::filesystem::path& path, const Matrix& images, int h, int w) {
  Require(images.cols() == h * w && images.rows() > 0, ErrorCode::kShape,
          "images do not match the strip shape");
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  const int total_w = w * images.rows();
  out << "P5\n" << total_w << ' ' << h << "\n255\n";
  for (int r = 0; r < h; ++r) {
    for (int i = 0; i < images.rows(); ++i) {
      for (int c = 0; c < w; ++c) {
        const double v = std::clamp(images(i, r * w + c), 0.0, 1.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
      }
    }
  }
}

const char* InterOpName(InterOp op) { return op == InterOp::kBatchNorm ? "batchnorm" : "relu"; }

const char* LatentSourceName(LatentSource s) {
  switch (s) {
    case LatentSource::kMu:
      return "mu";
    case LatentSource::kMuLogVar:
      return "mu-logvar";
    case LatentSource::kReparameterized:
      return "rep";
  }
  return "?";
}

void HeadSpec::Validate() const {
  Require(n_linear >= 1 && n_linear <= 3, ErrorCode::kInvalidSpec,
          "head depth must be 1, 2 or 3");
  Require(hidden >= 1, ErrorCode::kInvalidSpec, "head width must be positive");
}

std::string HeadSpec::Name() const {
  return std::to_string(n_linear) + "-" + InterOpName(inter_op) + "-" + LatentSourceName(source);
}

Sequential BuildHead(const HeadSpec& spec, int in_dim, int n_classes, Rng& rng) {
  spec.Validate();
  Sequential head;
  int prev = in_dim;
  for (int i = 0; i < spec.n_linear; ++i) {
    const bool last = i + 1 == spec.n_linear;
    const int out = last ? n_classes : spec.hidden;
    head.Add(Dense(prev, out))
        .Init(rng, !last && spec.inter_op == InterOp::kReLU ? std::sqrt(2.0) : 1.0);
    if (!last) {
      if (spec.inter_op == InterOp::kReLU) {
        head.Add(ActivationLayer(Activation::kReLU, out));
      } else {
        head.Add(BatchNorm(out));
      }
    }
    prev = out;
  }
  return head;
}

HeadResult TrainHeadOnFeatures(const Matrix& train_x, std::span<const int> train_y,
                               const Matrix& test_x, std::span<const int> test_y,
                               int n_classes, const HeadSpec& spec, const HeadTrainConfig& cfg,
                               const std::function<Matrix(int)>& resample) {
  Require(train_x.rows() == static_cast<int>(train_y.size()) &&
              test_x.rows() == static_cast<int>(test_y.size()) && train_x.rows() > 0 &&
              train_x.cols() == test_x.cols(),
          ErrorCode::kShape, "head data shapes do not match");
  Rng init(MixSeed(cfg.seed, 1));
  Sequential head = BuildHead(spec, train_x.cols(), n_classes, init);
  Adam opt(AdamConfig{cfg.learning_rate});
  Rng order_rng(MixSeed(cfg.seed, 2));
  const int n = train_x.rows();
  // BatchNorm cannot normalize a single row; drop a trailing singleton batch.
  const int min_batch = spec.inter_op == InterOp::kBatchNorm && spec.n_linear > 1 ? 2 : 1;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Matrix features = resample ? resample(epoch) : Matrix();
    const Matrix& x = resample ? features : train_x;
    const auto order = order_rng.Permutation(n);
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int end = std::min(n, start + cfg.batch_size);
      if (end - start < min_batch) continue;
      const std::span<const int> idx(order.data() + start, end - start);
      std::vector<int> labels;
      for (int i : idx) labels.push_back(train_y[i]);
      head.ZeroGrad();
      const auto ce = SoftmaxCrossEntropy(head.Forward(x.SelectRows(idx)), labels);
      head.Backward(ce.grad);
      opt.Step(head.Params());
    }
  }
  HeadResult r;
  r.predictions = ArgmaxRows(head.Apply(test_x));
  long correct = 0;
  for (size_t i = 0; i < test_y.size(); ++i) correct += r.predictions[i] == test_y[i];
  r.accuracy = static_cast<double>(correct) / static_cast<double>(test_y.size());
  r.f2 = FBeta(ConfusionMatrix::FromLabels(test_y, r.predictions, n_classes), 2.0).macro;
  return r;
}

Matrix LatentFeatures(const FactorVae& model, const Matrix& images, LatentSource source,
                      uint64_t seed) {
  const auto e = model.Encode(images);
  switch (source) {
    case LatentSource::kMu:
      return e.mu;
    case LatentSource::kMuLogVar:
      return Matrix::ConcatColumns(e.mu, e.logvar);
    case LatentSource::kReparameterized:
      return Reparameterize(e.mu, e.logvar, seed);
  }
  return e.mu;
}

HeadResult TrainLatentHead(const FactorVae& model, const Matrix& train_images,
                           std::span<const int> train_y, const Matrix& test_images,
                           std::span<const int> test_y, int n_classes, const HeadSpec& spec,
                           const HeadTrainConfig& cfg) {
  const uint64_t test_seed = MixSeed(cfg.seed, 7);
  const Matrix test_x = LatentFeatures(model, test_images, spec.source, test_seed);
  if (spec.source != LatentSource::kReparameterized) {
    return TrainHeadOnFeatures(LatentFeatures(model, train_images, spec.source, 0), train_y,
                               test_x, test_y, n_classes, spec, cfg);
  }
  // Fresh reparameterization noise every epoch.
  const auto enc = model.Encode(train_images);
  auto resample = [&](int epoch) {
    return Reparameterize(enc.mu, enc.logvar, MixSeed(cfg.seed, 100 + epoch));
  };
  return TrainHeadOnFeatures(enc.mu, train_y, test_x, test_y, n_classes, spec, cfg, resample);
}

std::vector<HeadSpec> DefaultHeadGrid() {
  std::vector<HeadSpec> grid;
  for (int depth = 1; depth <= 3; ++depth) {
    for (InterOp op : {InterOp::kBatchNorm, InterOp::kReLU}) {
      for (LatentSource s :
           {LatentSource::kMu, LatentSource::kMuLogVar, LatentSource::kReparameterized}) {
        HeadSpec h;
        h.n_linear = depth;
        h.inter_op = op;
        h.source = s;
        grid.push_back(h);
      }
    }
  }
  return grid;
}

std::vector<AblationRow> RunHeadAblation(const FactorVae& model, const Matrix& train_images,
                                         std::span<const int> train_y,
                                         const Matrix& test_images, std::span<const int> test_y,
                                         int n_classes, const std::vector<HeadSpec>& grid,
                                         const HeadTrainConfig& cfg) {
  std::vector<AblationRow> rows(grid.size());
  ParallelFor(static_cast<int>(grid.size()), [&](int i) {
    const auto r = TrainLatentHead(model, train_images, train_y, test_images, test_y, n_classes,
                                   grid[i], cfg);
    rows[i] = {grid[i], model.config().encoder, model.latent_dim(), cfg.seed, r.accuracy, r.f2};
  });
  return rows;
}

void WriteAblationCsv(const std::filesystem::path& path, const std::vector<AblationRow>& rows) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "n_linear,inter_op,source,encoder,latent_dim,seed,accuracy,f2\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,%s,%d,%llu,%.6f,%.6f\n", r.head.n_linear,
                  InterOpName(r.head.inter_op), LatentSourceName(r.head.source),
                  EncoderKindName(r.encoder), r.latent_dim,
                  static_cast<unsigned long long>(r.seed), r.accuracy, r.f2);
    out << buf;
  }
}

}  // namespace jamcomp
