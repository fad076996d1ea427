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

#ifndef JAMCOMP_FEATURES_FFT_H_
#define JAMCOMP_FEATURES_FFT_H_

#include <complex>
#include <span>
#include <vector>

namespace jamcomp {

// Forward DFT, unnormalized: X[m] = sum_k x[k] exp(-2*pi*i*k*m/n).
// Iterative radix-2; n must be a power of two >= 2 (invalid-length error
// otherwise).
std::vector<std::complex<double>> Fft(std::span<const std::complex<double>> x);

// Inverse via the conjugate trick, scaled by 1/n.
std::vector<std::complex<double>> InverseFft(std::span<const std::complex<double>> x);

bool IsPowerOfTwo(long n);

}  // namespace jamcomp

#endif  // JAMCOMP_FEATURES_FFT_H_
