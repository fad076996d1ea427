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

// Layers with hand-written backward passes. Every layer maps a batch
// (rows = samples) to a batch; convolutional layers read each row as a
// channel-major flattened tensor.

#ifndef JAMCOMP_NN_LAYERS_H_
#define JAMCOMP_NN_LAYERS_H_

#include <memory>
#include <string>
#include <vector>

#include "common/matrix.h"
#include "common/rng.h"

namespace jamcomp {

struct Param {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;

  void ZeroGrad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::unique_ptr<Layer> Clone() const = 0;
  virtual int in_dim() const = 0;
  virtual int out_dim() const = 0;
  virtual std::string Describe() const = 0;

  // Inference; no caching, safe to call concurrently.
  virtual Matrix Apply(const Matrix& x) const = 0;
  // Training forward; caches whatever Backward needs.
  virtual Matrix Forward(const Matrix& x) {
    input_ = x;
    return Apply(x);
  }
  // Accumulates parameter gradients and returns d(loss)/d(input).
  virtual Matrix Backward(const Matrix& grad_out) = 0;
  virtual std::vector<Param*> Params() { return {}; }
  virtual std::vector<const Param*> Params() const { return {}; }
  // Multiply-accumulates per sample.
  virtual long Macs() const { return 0; }

 protected:
  Matrix input_;
};

class Dense : public Layer {
 public:
  Dense(int in, int out);
  // Uniform(-b, b), b = gain * sqrt(3 / fan_in); bias zero.
  void Init(Rng& rng, double gain);

  std::unique_ptr<Layer> Clone() const override { return std::make_unique<Dense>(*this); }
  int in_dim() const override { return in_; }
  int out_dim() const override { return out_; }
  std::string Describe() const override;
  Matrix Apply(const Matrix& x) const override;
  Matrix Backward(const Matrix& grad_out) override;
  std::vector<Param*> Params() override { return {&weight_, &bias_}; }
  std::vector<const Param*> Params() const override { return {&weight_, &bias_}; }
  long Macs() const override { return static_cast<long>(in_) * out_; }

  // Row-major (out x in).
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }
  const Param& weight() const { return weight_; }
  const Param& bias() const { return bias_; }

 private:
  int in_, out_;
  Param weight_, bias_;
};

// 1-D convolution, zero padding (kernel-1)/2, input (in_ch x in_len).
class Conv1d : public Layer {
 public:
  Conv1d(int in_ch, int in_len, int out_ch, int kernel, int stride);
  void Init(Rng& rng, double gain);

  std::unique_ptr<Layer> Clone() const override { return std::make_unique<Conv1d>(*this); }
  int in_dim() const override { return in_ch_ * in_len_; }
  int out_dim() const override { return out_ch_ * out_len_; }
  std::string Describe() const override;
  Matrix Apply(const Matrix& x) const override;
  Matrix Backward(const Matrix& grad_out) override;
  std::vector<Param*> Params() override { return {&weight_, &bias_}; }
  std::vector<const Param*> Params() const override { return {&weight_, &bias_}; }
  long Macs() const override {
    return static_cast<long>(out_ch_) * out_len_ * in_ch_ * kernel_;
  }

  int in_ch() const { return in_ch_; }
  int in_len() const { return in_len_; }
  int out_ch() const { return out_ch_; }
  int out_len() const { return out_len_; }
  int kernel() const { return kernel_; }
  int stride() const { return stride_; }
  int padding() const { return (kernel_ - 1) / 2; }
  // (out_ch x in_ch x kernel)
  const Param& weight() const { return weight_; }
  const Param& bias() const { return bias_; }
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

  static int OutputLength(int in_len, int kernel, int stride);

 private:
  int in_ch_, in_len_, out_ch_, kernel_, stride_, out_len_;
  Param weight_, bias_;
};

// 2-D convolution, zero padding (kernel-1)/2, input (in_ch x h x w).
class Conv2d : public Layer {
 public:
  Conv2d(int in_ch, int h, int w, int out_ch, int kernel, int stride);
  void Init(Rng& rng, double gain);

  std::unique_ptr<Layer> Clone() const override { return std::make_unique<Conv2d>(*this); }
  int in_dim() const override { return in_ch_ * h_ * w_; }
  int out_dim() const override { return out_ch_ * out_h_ * out_w_; }
  std::string Describe() const override;
  Matrix Apply(const Matrix& x) const override;
  Matrix Backward(const Matrix& grad_out) override;
  std::vector<Param*> Params() override { return {&weight_, &bias_}; }
  std::vector<const Param*> Params() const override { return {&weight_, &bias_}; }
  long Macs() const override {
    return static_cast<long>(out_ch_) * out_h_ * out_w_ * in_ch_ * kernel_ * kernel_;
  }
  int out_h() const { return out_h_; }
  int out_w() const { return out_w_; }
  int out_ch() const { return out_ch_; }

 private:
  int in_ch_, h_, w_, out_ch_, kernel_, stride_, out_h_, out_w_;
  Param weight_, bias_;
};

enum class Activation { kLinear, kReLU, kSigmoid, kLeakyReLU };

const char* ActivationName(Activation a);
Activation ParseActivation(const std::string& name);

class ActivationLayer : public Layer {
 public:
  ActivationLayer(Activation kind, int dim, double leak = 0.2)
      : kind_(kind), dim_(dim), leak_(leak) {}

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<ActivationLayer>(*this);
  }
  int in_dim() const override { return dim_; }
  int out_dim() const override { return dim_; }
  std::string Describe() const override { return ActivationName(kind_); }
  Matrix Apply(const Matrix& x) const override;
  Matrix Forward(const Matrix& x) override;
  Matrix Backward(const Matrix& grad_out) override;
  Activation kind() const { return kind_; }

 private:
  Activation kind_;
  int dim_;
  double leak_;
  Matrix output_;
};

// Per-feature batch normalization. Training uses batch statistics and
// updates running estimates; Apply uses the running estimates.
class BatchNorm : public Layer {
 public:
  explicit BatchNorm(int dim, double momentum = 0.1, double eps = 1e-5);

  std::unique_ptr<Layer> Clone() const override { return std::make_unique<BatchNorm>(*this); }
  int in_dim() const override { return dim_; }
  int out_dim() const override { return dim_; }
  std::string Describe() const override { return "batchnorm"; }
  Matrix Apply(const Matrix& x) const override;
  Matrix Forward(const Matrix& x) override;
  Matrix Backward(const Matrix& grad_out) override;
  std::vector<Param*> Params() override { return {&gamma_, &beta_}; }
  std::vector<const Param*> Params() const override { return {&gamma_, &beta_}; }

 private:
  int dim_;
  double momentum_, eps_;
  Param gamma_, beta_;
  std::vector<double> running_mean_, running_var_;
  Matrix normalized_;
  std::vector<double> inv_std_;
};

// Ordered layer stack with value semantics.
class Sequential {
 public:
  Sequential() = default;
  Sequential(const Sequential& other);
  Sequential& operator=(const Sequential& other);
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  template <typename L>
  L& Add(L layer) {
    auto owned = std::make_unique<L>(std::move(layer));
    L& ref = *owned;
    layers_.push_back(std::move(owned));
    return ref;
  }
  void AddOwned(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  Matrix Apply(const Matrix& x) const;
  Matrix Forward(const Matrix& x);
  Matrix Backward(const Matrix& grad_out);
  std::vector<Param*> Params();
  std::vector<const Param*> Params() const;
  void ZeroGrad();
  long Macs() const;

  int in_dim() const { return layers_.empty() ? 0 : layers_.front()->in_dim(); }
  int out_dim() const { return layers_.empty() ? 0 : layers_.back()->out_dim(); }
  size_t size() const { return layers_.size(); }
  Layer& at(size_t i) { return *layers_[i]; }
  const Layer& at(size_t i) const { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// 3x3 conv -> ReLU -> 3x3 conv, plus identity skip, then ReLU.
class ResidualBlock : public Layer {
 public:
  ResidualBlock(int channels, int h, int w, Rng& rng);

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<ResidualBlock>(*this);
  }
  int in_dim() const override { return body_.in_dim(); }
  int out_dim() const override { return body_.out_dim(); }
  std::string Describe() const override { return "residual"; }
  Matrix Apply(const Matrix& x) const override;
  Matrix Forward(const Matrix& x) override;
  Matrix Backward(const Matrix& grad_out) override;
  std::vector<Param*> Params() override { return body_.Params(); }
  std::vector<const Param*> Params() const override { return body_.Params(); }
  long Macs() const override { return body_.Macs(); }

 private:
  Sequential body_;
  Matrix output_;
};

}  // namespace jamcomp

#endif  // JAMCOMP_NN_LAYERS_H_
