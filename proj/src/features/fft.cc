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

#include "features/fft.h"

#include <cmath>
#include <numbers>

#include "common/error.h"

namespace jamcomp {

bool IsPowerOfTwo(long n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<std::complex<double>> Fft(std::span<const std::complex<double>> x) {
  const size_t n = x.size();
  Require(n >= 2 && IsPowerOfTwo(static_cast<long>(n)), ErrorCode::kInvalidLength,
          "fft length must be a power of two >= 2, got " + std::to_string(n));
  std::vector<std::complex<double>> a(x.begin(), x.end());
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // Twiddles evaluated directly per index; recurrences drift at n = 4096.
  std::vector<std::complex<double>> twiddle(n / 2);
  for (size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / n;
    twiddle[k] = {std::cos(angle), std::sin(angle)};
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const size_t half = len >> 1;
    const size_t step = n / len;
    for (size_t start = 0; start < n; start += len) {
      for (size_t k = 0; k < half; ++k) {
        const auto u = a[start + k];
        const auto v = a[start + k + half] * twiddle[k * step];
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
  return a;
}

std::vector<std::complex<double>> InverseFft(std::span<const std::complex<double>> x) {
  std::vector<std::complex<double>> conj(x.size());
  for (size_t i = 0; i < x.size(); ++i) conj[i] = std::conj(x[i]);
  auto y = Fft(conj);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : y) v = std::conj(v) * scale;
  return y;
}

}  // namespace jamcomp
