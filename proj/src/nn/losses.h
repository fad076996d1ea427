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

#ifndef JAMCOMP_NN_LOSSES_H_
#define JAMCOMP_NN_LOSSES_H_

#include <cstdint>
#include <span>
#include <vector>

#include "common/matrix.h"

namespace jamcomp {

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

// Mean over all elements of (x_hat - x)^2.
double MseLoss(const Matrix& x, const Matrix& x_hat);
// d MseLoss / d x_hat = 2 (x_hat - x) / (rows * cols).
Matrix MseGrad(const Matrix& x, const Matrix& x_hat);

// Mean over the batch of -1/2 * sum_d (1 + lv - mu^2 - exp(lv)).
double GaussianKl(const Matrix& mu, const Matrix& logvar);
struct KlGrads {
  Matrix d_mu;
  Matrix d_logvar;
};
KlGrads GaussianKlGrad(const Matrix& mu, const Matrix& logvar);

double ClampLogVar(double lv);

// z = mu + exp(lv/2) * n with lv clamped to [-10, 10] and n ~ N(0, 1)
// drawn from Rng(seed) in row-major order. The draws are returned in noise
// when it is non-null.
Matrix Reparameterize(const Matrix& mu, const Matrix& logvar, uint64_t seed,
                      Matrix* noise = nullptr);

struct CrossEntropyResult {
  double loss = 0.0;  // mean over rows
  Matrix grad;        // d loss / d logits
};
// Softmax cross-entropy against integer class labels.
CrossEntropyResult SoftmaxCrossEntropy(const Matrix& logits, std::span<const int> labels);

}  // namespace jamcomp

#endif  // JAMCOMP_NN_LOSSES_H_
