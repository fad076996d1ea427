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

#include "nn/adam.h"

#include <cmath>

#include "common/error.h"

namespace jamcomp {

void AdamStep(std::span<double> params, std::span<const double> grads, AdamState& s) {
  Require(params.size() == grads.size(), ErrorCode::kShape, "adam shape mismatch");
  if (s.m.empty()) {
    s.m.assign(params.size(), 0.0);
    s.v.assign(params.size(), 0.0);
  }
  Require(s.m.size() == params.size(), ErrorCode::kShape, "adam state shape mismatch");
  ++s.t;
  const auto& c = s.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.t));
  for (size_t i = 0; i < params.size(); ++i) {
    s.m[i] = c.beta1 * s.m[i] + (1.0 - c.beta1) * grads[i];
    s.v[i] = c.beta2 * s.v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
    const double m_hat = s.m[i] / bc1;
    const double v_hat = s.v[i] / bc2;
    params[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

void Adam::Step(const std::vector<Param*>& params) {
  if (states_.empty()) states_.assign(params.size(), AdamState{config_, {}, {}, 0});
  Require(states_.size() == params.size(), ErrorCode::kShape,
          "adam parameter list changed between steps");
  for (size_t i = 0; i < params.size(); ++i) {
    AdamStep(params[i]->value, params[i]->grad, states_[i]);
  }
}

}  // namespace jamcomp
