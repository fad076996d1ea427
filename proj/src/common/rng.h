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

#ifndef JAMCOMP_COMMON_RNG_H_
#define JAMCOMP_COMMON_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

namespace jamcomp {

// SplitMix64 finalizer. Child seeds are derived as
// MixSeed(parent, stream) = splitmix64(parent ^ splitmix64(stream + golden)),
// which is stable across platforms and releases.
uint64_t SplitMix64(uint64_t x);
uint64_t MixSeed(uint64_t parent, uint64_t stream);

// Portable random source. std::mt19937_64 is fully specified by the
// standard; the distributions here are implemented locally because the
// standard library distributions are not reproducible across vendors.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  uint64_t UniformInt(uint64_t n);
  // Standard normal via Box-Muller; caches the second draw.
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  // Fisher-Yates permutation of [0, n).
  std::vector<int> Permutation(int n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace jamcomp

#endif  // JAMCOMP_COMMON_RNG_H_
