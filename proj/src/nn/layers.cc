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

#include "nn/layers.h"

#include <algorithm>
#include <cmath>

#include "common/error.h"

namespace jamcomp {
namespace {

void CheckCols(const Matrix& x, int expected, const char* layer) {
  Require(x.cols() == expected, ErrorCode::kShape,
          std::string(layer) + " expects " + std::to_string(expected) +
              " inputs, got " + std::to_string(x.cols()));
}

void InitUniform(Param& p, Rng& rng, double bound) {
  for (double& v : p.value) v = rng.Uniform(-bound, bound);
}

}  // namespace

// ---------------------------------------------------------------- Dense

Dense::Dense(int in, int out) : in_(in), out_(out) {
  Require(in > 0 && out > 0, ErrorCode::kInvalidSpec, "dense dimensions must be positive");
  weight_ = {"weight", std::vector<double>(static_cast<size_t>(in) * out, 0.0),
             std::vector<double>(static_cast<size_t>(in) * out, 0.0)};
  bias_ = {"bias", std::vector<double>(out, 0.0), std::vector<double>(out, 0.0)};
}

void Dense::Init(Rng& rng, double gain) {
  InitUniform(weight_, rng, gain * std::sqrt(3.0 / in_));
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0);
}

std::string Dense::Describe() const {
  return "dense(" + std::to_string(in_) + "," + std::to_string(out_) + ")";
}

Matrix Dense::Apply(const Matrix& x) const {
  CheckCols(x, in_, "dense");
  Matrix y(x.rows(), out_);
  const double* w = weight_.value.data();
  for (int b = 0; b < x.rows(); ++b) {
    const double* xb = x.row(b).data();
    double* yb = y.row(b).data();
    for (int o = 0; o < out_; ++o) {
      const double* wo = w + static_cast<size_t>(o) * in_;
      double acc = 0.0;
      for (int i = 0; i < in_; ++i) acc += wo[i] * xb[i];
      yb[o] = acc + bias_.value[o];
    }
  }
  return y;
}

Matrix Dense::Backward(const Matrix& g) {
  Require(g.rows() == input_.rows() && g.cols() == out_, ErrorCode::kShape,
          "dense backward shape mismatch");
  Matrix gin(g.rows(), in_);
  const double* w = weight_.value.data();
  double* gw = weight_.grad.data();
  for (int b = 0; b < g.rows(); ++b) {
    const double* xb = input_.row(b).data();
    const double* gb = g.row(b).data();
    double* gib = gin.row(b).data();
    for (int o = 0; o < out_; ++o) {
      const double go = gb[o];
      if (go == 0.0) continue;
      bias_.grad[o] += go;
      const double* wo = w + static_cast<size_t>(o) * in_;
      double* gwo = gw + static_cast<size_t>(o) * in_;
      for (int i = 0; i < in_; ++i) {
        gwo[i] += go * xb[i];
        gib[i] += go * wo[i];
      }
    }
  }
  return gin;
}

// ---------------------------------------------------------------- Conv1d

int Conv1d::OutputLength(int in_len, int kernel, int stride) {
  const int pad = (kernel - 1) / 2;
  return (in_len + 2 * pad - kernel) / stride + 1;
}

Conv1d::Conv1d(int in_ch, int in_len, int out_ch, int kernel, int stride)
    : in_ch_(in_ch), in_len_(in_len), out_ch_(out_ch), kernel_(kernel), stride_(stride) {
  Require(in_ch > 0 && in_len > 0 && out_ch > 0 && kernel > 0, ErrorCode::kInvalidSpec,
          "conv1d dimensions must be positive");
  Require(stride == 1 || stride == 2, ErrorCode::kInvalidSpec, "conv1d stride must be 1 or 2");
  out_len_ = OutputLength(in_len, kernel, stride);
  Require(out_len_ > 0, ErrorCode::kInvalidSpec, "conv1d kernel longer than input");
  const size_t nw = static_cast<size_t>(out_ch) * in_ch * kernel;
  weight_ = {"weight", std::vector<double>(nw, 0.0), std::vector<double>(nw, 0.0)};
  bias_ = {"bias", std::vector<double>(out_ch, 0.0), std::vector<double>(out_ch, 0.0)};
}

void Conv1d::Init(Rng& rng, double gain) {
  InitUniform(weight_, rng, gain * std::sqrt(3.0 / (in_ch_ * kernel_)));
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0);
}

std::string Conv1d::Describe() const {
  return "conv1d(" + std::to_string(in_ch_) + "," + std::to_string(out_ch_) + ",k" +
         std::to_string(kernel_) + ",s" + std::to_string(stride_) + ")";
}

Matrix Conv1d::Apply(const Matrix& x) const {
  CheckCols(x, in_dim(), "conv1d");
  Matrix y(x.rows(), out_dim());
  const int pad = padding();
  for (int b = 0; b < x.rows(); ++b) {
    const double* xb = x.row(b).data();
    double* yb = y.row(b).data();
    for (int oc = 0; oc < out_ch_; ++oc) {
      for (int t = 0; t < out_len_; ++t) {
        double acc = bias_.value[oc];
        const int start = t * stride_ - pad;
        for (int ic = 0; ic < in_ch_; ++ic) {
          const double* w = &weight_.value[(static_cast<size_t>(oc) * in_ch_ + ic) * kernel_];
          const double* xc = xb + static_cast<size_t>(ic) * in_len_;
          for (int k = 0; k < kernel_; ++k) {
            const int pos = start + k;
            if (pos >= 0 && pos < in_len_) acc += w[k] * xc[pos];
          }
        }
        yb[static_cast<size_t>(oc) * out_len_ + t] = acc;
      }
    }
  }
  return y;
}

Matrix Conv1d::Backward(const Matrix& g) {
  Require(g.rows() == input_.rows() && g.cols() == out_dim(), ErrorCode::kShape,
          "conv1d backward shape mismatch");
  Matrix gin(g.rows(), in_dim());
  const int pad = padding();
  for (int b = 0; b < g.rows(); ++b) {
    const double* xb = input_.row(b).data();
    const double* gb = g.row(b).data();
    double* gib = gin.row(b).data();
    for (int oc = 0; oc < out_ch_; ++oc) {
      for (int t = 0; t < out_len_; ++t) {
        const double go = gb[static_cast<size_t>(oc) * out_len_ + t];
        if (go == 0.0) continue;
        bias_.grad[oc] += go;
        const int start = t * stride_ - pad;
        for (int ic = 0; ic < in_ch_; ++ic) {
          const size_t wbase = (static_cast<size_t>(oc) * in_ch_ + ic) * kernel_;
          const size_t xbase = static_cast<size_t>(ic) * in_len_;
          for (int k = 0; k < kernel_; ++k) {
            const int pos = start + k;
            if (pos < 0 || pos >= in_len_) continue;
            weight_.grad[wbase + k] += go * xb[xbase + pos];
            gib[xbase + pos] += go * weight_.value[wbase + k];
          }
        }
      }
    }
  }
  return gin;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_ch, int h, int w, int out_ch, int kernel, int stride)
    : in_ch_(in_ch), h_(h), w_(w), out_ch_(out_ch), kernel_(kernel), stride_(stride) {
  Require(in_ch > 0 && h > 0 && w > 0 && out_ch > 0 && kernel > 0 && stride > 0,
          ErrorCode::kInvalidSpec, "conv2d dimensions must be positive");
  out_h_ = Conv1d::OutputLength(h, kernel, stride);
  out_w_ = Conv1d::OutputLength(w, kernel, stride);
  const size_t nw = static_cast<size_t>(out_ch) * in_ch * kernel * kernel;
  weight_ = {"weight", std::vector<double>(nw, 0.0), std::vector<double>(nw, 0.0)};
  bias_ = {"bias", std::vector<double>(out_ch, 0.0), std::vector<double>(out_ch, 0.0)};
}

void Conv2d::Init(Rng& rng, double gain) {
  InitUniform(weight_, rng, gain * std::sqrt(3.0 / (in_ch_ * kernel_ * kernel_)));
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0);
}

std::string Conv2d::Describe() const {
  return "conv2d(" + std::to_string(in_ch_) + "," + std::to_string(out_ch_) + ",k" +
         std::to_string(kernel_) + ",s" + std::to_string(stride_) + ")";
}

Matrix Conv2d::Apply(const Matrix& x) const {
  CheckCols(x, in_dim(), "conv2d");
  Matrix y(x.rows(), out_dim());
  const int pad = (kernel_ - 1) / 2;
  const size_t plane = static_cast<size_t>(h_) * w_;
  for (int b = 0; b < x.rows(); ++b) {
    const double* xb = x.row(b).data();
    double* yb = y.row(b).data();
    for (int oc = 0; oc < out_ch_; ++oc) {
      double* yc = yb + static_cast<size_t>(oc) * out_h_ * out_w_;
      for (int i = 0; i < out_h_ * out_w_; ++i) yc[i] = bias_.value[oc];
      for (int ic = 0; ic < in_ch_; ++ic) {
        const double* xc = xb + ic * plane;
        const double* wk =
            &weight_.value[(static_cast<size_t>(oc) * in_ch_ + ic) * kernel_ * kernel_];
        for (int oy = 0; oy < out_h_; ++oy) {
          for (int ky = 0; ky < kernel_; ++ky) {
            const int iy = oy * stride_ - pad + ky;
            if (iy < 0 || iy >= h_) continue;
            const double* xrow = xc + static_cast<size_t>(iy) * w_;
            double* yrow = yc + static_cast<size_t>(oy) * out_w_;
            for (int kx = 0; kx < kernel_; ++kx) {
              const double wv = wk[ky * kernel_ + kx];
              for (int ox = 0; ox < out_w_; ++ox) {
                const int ix = ox * stride_ - pad + kx;
                if (ix >= 0 && ix < w_) yrow[ox] += wv * xrow[ix];
              }
            }
          }
        }
      }
    }
  }
  return y;
}

Matrix Conv2d::Backward(const Matrix& g) {
  Require(g.rows() == input_.rows() && g.cols() == out_dim(), ErrorCode::kShape,
          "conv2d backward shape mismatch");
  Matrix gin(g.rows(), in_dim());
  const int pad = (kernel_ - 1) / 2;
  const size_t plane = static_cast<size_t>(h_) * w_;
  for (int b = 0; b < g.rows(); ++b) {
    const double* xb = input_.row(b).data();
    const double* gb = g.row(b).data();
    double* gib = gin.row(b).data();
    for (int oc = 0; oc < out_ch_; ++oc) {
      const double* gc = gb + static_cast<size_t>(oc) * out_h_ * out_w_;
      for (int i = 0; i < out_h_ * out_w_; ++i) bias_.grad[oc] += gc[i];
      for (int ic = 0; ic < in_ch_; ++ic) {
        const double* xc = xb + ic * plane;
        double* gic = gib + ic * plane;
        const size_t wbase = (static_cast<size_t>(oc) * in_ch_ + ic) * kernel_ * kernel_;
        for (int oy = 0; oy < out_h_; ++oy) {
          const double* grow = gc + static_cast<size_t>(oy) * out_w_;
          for (int ky = 0; ky < kernel_; ++ky) {
            const int iy = oy * stride_ - pad + ky;
            if (iy < 0 || iy >= h_) continue;
            const double* xrow = xc + static_cast<size_t>(iy) * w_;
            double* girow = gic + static_cast<size_t>(iy) * w_;
            for (int kx = 0; kx < kernel_; ++kx) {
              const double wv = weight_.value[wbase + ky * kernel_ + kx];
              double gw = 0.0;
              for (int ox = 0; ox < out_w_; ++ox) {
                const int ix = ox * stride_ - pad + kx;
                if (ix < 0 || ix >= w_) continue;
                gw += grow[ox] * xrow[ix];
                girow[ix] += grow[ox] * wv;
              }
              weight_.grad[wbase + ky * kernel_ + kx] += gw;
            }
          }
        }
      }
    }
  }
  return gin;
}

// ---------------------------------------------------------------- activations

const char* ActivationName(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kReLU: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kLeakyReLU: return "leaky_relu";
  }
  return "unknown";
}

Activation ParseActivation(const std::string& name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "relu") return Activation::kReLU;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "leaky_relu") return Activation::kLeakyReLU;
  Fail(ErrorCode::kFormat, "unknown activation '" + name + "'");
}

Matrix ActivationLayer::Apply(const Matrix& x) const {
  CheckCols(x, dim_, "activation");
  Matrix y = x;
  for (double& v : y.data()) {
    switch (kind_) {
      case Activation::kLinear: break;
      case Activation::kReLU: v = v > 0.0 ? v : 0.0; break;
      case Activation::kLeakyReLU: v = v > 0.0 ? v : leak_ * v; break;
      case Activation::kSigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
    }
  }
  return y;
}

Matrix ActivationLayer::Forward(const Matrix& x) {
  input_ = x;
  output_ = Apply(x);
  return output_;
}

Matrix ActivationLayer::Backward(const Matrix& g) {
  Matrix gin = g;
  auto& d = gin.data();
  const auto& in = input_.data();
  const auto& out = output_.data();
  for (size_t i = 0; i < d.size(); ++i) {
    switch (kind_) {
      case Activation::kLinear: break;
      case Activation::kReLU: d[i] = in[i] > 0.0 ? d[i] : 0.0; break;
      case Activation::kLeakyReLU: d[i] = in[i] > 0.0 ? d[i] : leak_ * d[i]; break;
      case Activation::kSigmoid: d[i] *= out[i] * (1.0 - out[i]); break;
    }
  }
  return gin;
}

// ---------------------------------------------------------------- batchnorm

BatchNorm::BatchNorm(int dim, double momentum, double eps)
    : dim_(dim), momentum_(momentum), eps_(eps),
      gamma_{"gamma", std::vector<double>(dim, 1.0), std::vector<double>(dim, 0.0)},
      beta_{"beta", std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)},
      running_mean_(dim, 0.0), running_var_(dim, 1.0) {}

Matrix BatchNorm::Apply(const Matrix& x) const {
  CheckCols(x, dim_, "batchnorm");
  Matrix y(x.rows(), dim_);
  for (int c = 0; c < dim_; ++c) {
    const double inv = 1.0 / std::sqrt(running_var_[c] + eps_);
    for (int b = 0; b < x.rows(); ++b) {
      y(b, c) = gamma_.value[c] * (x(b, c) - running_mean_[c]) * inv + beta_.value[c];
    }
  }
  return y;
}

Matrix BatchNorm::Forward(const Matrix& x) {
  CheckCols(x, dim_, "batchnorm");
  const int n = x.rows();
  normalized_ = Matrix(n, dim_);
  inv_std_.assign(dim_, 0.0);
  Matrix y(n, dim_);
  for (int c = 0; c < dim_; ++c) {
    double mean = 0.0;
    for (int b = 0; b < n; ++b) mean += x(b, c);
    mean /= n;
    double var = 0.0;
    for (int b = 0; b < n; ++b) var += (x(b, c) - mean) * (x(b, c) - mean);
    var /= n;
    inv_std_[c] = 1.0 / std::sqrt(var + eps_);
    for (int b = 0; b < n; ++b) {
      normalized_(b, c) = (x(b, c) - mean) * inv_std_[c];
      y(b, c) = gamma_.value[c] * normalized_(b, c) + beta_.value[c];
    }
    running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
    const double unbiased = n > 1 ? var * n / (n - 1) : var;
    running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * unbiased;
  }
  return y;
}

Matrix BatchNorm::Backward(const Matrix& g) {
  const int n = g.rows();
  Matrix gin(n, dim_);
  for (int c = 0; c < dim_; ++c) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (int b = 0; b < n; ++b) {
      sum_g += g(b, c);
      sum_gx += g(b, c) * normalized_(b, c);
    }
    gamma_.grad[c] += sum_gx;
    beta_.grad[c] += sum_g;
    const double scale = gamma_.value[c] * inv_std_[c] / n;
    for (int b = 0; b < n; ++b) {
      gin(b, c) = scale * (n * g(b, c) - sum_g - normalized_(b, c) * sum_gx);
    }
  }
  return gin;
}

// ---------------------------------------------------------------- sequential

Sequential::Sequential(const Sequential& other) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->Clone());
}

Sequential& Sequential::operator=(const Sequential& other) {
  if (this != &other) {
    Sequential copy(other);
    layers_ = std::move(copy.layers_);
  }
  return *this;
}

Matrix Sequential::Apply(const Matrix& x) const {
  Matrix h = x;
  for (const auto& l : layers_) h = l->Apply(h);
  return h;
}

Matrix Sequential::Forward(const Matrix& x) {
  Matrix h = x;
  for (auto& l : layers_) h = l->Forward(h);
  return h;
}

Matrix Sequential::Backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->Backward(g);
  return g;
}

std::vector<Param*> Sequential::Params() {
  std::vector<Param*> out;
  for (auto& l : layers_) {
    for (Param* p : l->Params()) out.push_back(p);
  }
  return out;
}

std::vector<const Param*> Sequential::Params() const {
  std::vector<const Param*> out;
  for (const auto& l : layers_) {
    for (const Param* p : static_cast<const Layer&>(*l).Params()) out.push_back(p);
  }
  return out;
}

void Sequential::ZeroGrad() {
  for (Param* p : Params()) p->ZeroGrad();
}

long Sequential::Macs() const {
  long total = 0;
  for (const auto& l : layers_) total += l->Macs();
  return total;
}

// ---------------------------------------------------------------- residual

ResidualBlock::ResidualBlock(int channels, int h, int w, Rng& rng) {
  Conv2d first(channels, h, w, channels, 3, 1);
  first.Init(rng, std::sqrt(2.0));
  Conv2d second(channels, h, w, channels, 3, 1);
  second.Init(rng, 0.5);
  body_.Add(std::move(first));
  body_.Add(ActivationLayer(Activation::kReLU, channels * h * w));
  body_.Add(std::move(second));
}

Matrix ResidualBlock::Apply(const Matrix& x) const {
  Matrix y = body_.Apply(x);
  auto& d = y.data();
  const auto& in = x.data();
  for (size_t i = 0; i < d.size(); ++i) d[i] = std::max(0.0, d[i] + in[i]);
  return y;
}

Matrix ResidualBlock::Forward(const Matrix& x) {
  Matrix y = body_.Forward(x);
  auto& d = y.data();
  const auto& in = x.data();
  for (size_t i = 0; i < d.size(); ++i) d[i] = std::max(0.0, d[i] + in[i]);
  output_ = y;
  return y;
}

Matrix ResidualBlock::Backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  auto& d = g.data();
  const auto& out = output_.data();
  for (size_t i = 0; i < d.size(); ++i) {
    if (out[i] <= 0.0) d[i] = 0.0;
  }
  Matrix gin = body_.Backward(g);
  auto& gi = gin.data();
  for (size_t i = 0; i < gi.size(); ++i) gi[i] += d[i];
  return gin;
}

}  // namespace jamcomp
