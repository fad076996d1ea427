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

#include "nn/losses.h"

#include <algorithm>
#include <cmath>

#include "common/error.h"
#include "common/rng.h"

namespace jamcomp {

double MseLoss(const Matrix& x, const Matrix& x_hat) {
  Require(x.rows() == x_hat.rows() && x.cols() == x_hat.cols(), ErrorCode::kShape,
          "mse shape mismatch");
  if (x.empty()) return 0.0;
  double acc = 0.0;
  const auto& a = x.data();
  const auto& b = x_hat.data();
  for (size_t i = 0; i < a.size(); ++i) acc += (b[i] - a[i]) * (b[i] - a[i]);
  return acc / static_cast<double>(a.size());
}

Matrix MseGrad(const Matrix& x, const Matrix& x_hat) {
  Matrix g(x.rows(), x.cols());
  const double scale = 2.0 / static_cast<double>(x.size());
  for (size_t i = 0; i < g.size(); ++i) g.data()[i] = scale * (x_hat.data()[i] - x.data()[i]);
  return g;
}

double ClampLogVar(double lv) {
  if (std::isnan(lv)) return lv;
  return std::clamp(lv, kLogVarMin, kLogVarMax);
}

double GaussianKl(const Matrix& mu, const Matrix& logvar) {
  Require(mu.rows() == logvar.rows() && mu.cols() == logvar.cols(), ErrorCode::kShape,
          "kl shape mismatch");
  if (mu.rows() == 0) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < mu.size(); ++i) {
    const double m = mu.data()[i];
    const double lv = logvar.data()[i];
    acc += 1.0 + lv - m * m - std::exp(lv);
  }
  return -0.5 * acc / mu.rows();
}

KlGrads GaussianKlGrad(const Matrix& mu, const Matrix& logvar) {
  KlGrads g{Matrix(mu.rows(), mu.cols()), Matrix(mu.rows(), mu.cols())};
  const double inv_b = 1.0 / mu.rows();
  for (size_t i = 0; i < mu.size(); ++i) {
    g.d_mu.data()[i] = mu.data()[i] * inv_b;
    g.d_logvar.data()[i] = 0.5 * (std::exp(logvar.data()[i]) - 1.0) * inv_b;
  }
  return g;
}

Matrix Reparameterize(const Matrix& mu, const Matrix& logvar, uint64_t seed, Matrix* noise) {
  Require(mu.rows() == logvar.rows() && mu.cols() == logvar.cols(), ErrorCode::kShape,
          "reparameterize shape mismatch");
  Rng rng(seed);
  Matrix z(mu.rows(), mu.cols());
  if (noise) *noise = Matrix(mu.rows(), mu.cols());
  for (size_t i = 0; i < mu.size(); ++i) {
    const double n = rng.Normal();
    if (noise) noise->data()[i] = n;
    z.data()[i] = mu.data()[i] + std::exp(0.5 * ClampLogVar(logvar.data()[i])) * n;
  }
  return z;
}

CrossEntropyResult SoftmaxCrossEntropy(const Matrix& logits, std::span<const int> labels) {
  Require(static_cast<size_t>(logits.rows()) == labels.size(), ErrorCode::kShape,
          "label count mismatch");
  CrossEntropyResult r{0.0, Matrix(logits.rows(), logits.cols())};
  const int n = logits.rows();
  if (n == 0) return r;
  for (int b = 0; b < n; ++b) {
    const auto row = logits.row(b);
    Require(labels[b] >= 0 && labels[b] < logits.cols(), ErrorCode::kInvalidArgument,
            "label out of range");
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double log_z = mx + std::log(sum);
    r.loss += log_z - row[labels[b]];
    for (int c = 0; c < logits.cols(); ++c) {
      const double p = std::exp(row[c] - log_z);
      r.grad(b, c) = (p - (c == labels[b] ? 1.0 : 0.0)) / n;
    }
  }
  r.loss /= n;
  return r;
}

}  // namespace jamcomp
