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

#ifndef JAMCOMP_NN_ADAM_H_
#define JAMCOMP_NN_ADAM_H_

#include <span>
#include <vector>

#include "nn/layers.h"

namespace jamcomp {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
};

// One bias-corrected Adam update of params in place. The state's moment
// vectors are sized on first use.
void AdamStep(std::span<double> params, std::span<const double> grads, AdamState& state);

// Adam over a fixed list of Param blocks; one AdamState per block.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}
  void Step(const std::vector<Param*>& params);
  long steps() const { return states_.empty() ? 0 : states_.front().t; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<AdamState> states_;
};

}  // namespace jamcomp

#endif  // JAMCOMP_NN_ADAM_H_
