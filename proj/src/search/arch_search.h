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

// Exhaustive architecture grids for the (V)AE compressors: enumeration,
// parameter/MAC accounting, screening, top-k retraining and the
// compressibility-first selection rule.

#ifndef JAMCOMP_SEARCH_ARCH_SEARCH_H_
#define JAMCOMP_SEARCH_ARCH_SEARCH_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "common/matrix.h"
#include "features/features.h"
#include "json.hpp"
#include "nn/ae_model.h"
#include "nn/train.h"

namespace jamcomp {

struct ConvSpec {
  int out_ch = 0;
  int kernel = 3;
  int stride = 2;

  bool operator==(const ConvSpec&) const = default;
};

struct ArchSpec {
  int input_dim = 0;
  int input_channels = 1;  // > 1 only with a conv front
  std::vector<int> hidden_widths;
  int latent_dim = 0;
  std::vector<ConvSpec> conv_front;
  bool variational = false;

  // Widths non-increasing, 1 <= depth, latent < last width, conv strides in
  // {1, 2}. Throws invalid-spec.
  void Validate() const;
  // e.g. "in177-h128x128-z6" or "in2x128-c8k5s2-c16k3s1-h64x32-z4".
  std::string Descriptor() const;
  static ArchSpec FromDescriptor(const std::string& descriptor);

  std::vector<LayerSpec> EncoderSpecs() const;
  std::vector<LayerSpec> DecoderSpecs() const;
  AeModel Build(uint64_t seed) const;

  bool operator==(const ArchSpec&) const = default;
};

struct SearchSpace {
  Domain domain = Domain::kSpectral;
  int input_dim = 0;
  int input_channels = 1;
  std::vector<int> widths;  // allowed hidden widths
  int min_depth = 2;
  int max_depth = 3;
  int latent_min = 3;
  int latent_max = 10;
  // Each entry is one conv-front option; an empty entry means dense only.
  std::vector<std::vector<ConvSpec>> conv_options = {{}};
  bool variational = false;

  nlohmann::json ToJson() const;
  static SearchSpace FromJson(const nlohmann::json& j);
};

// Depth 2-3, widths {32, 64, 128}, latent 3-10 over the domain's input size.
// The IQ space adds a strided conv front option.
SearchSpace DefaultSearchSpace(Domain domain);

// Exhaustive, duplicate-free. Order: conv option, depth, widths
// (lexicographic), latent. Throws empty-space if nothing qualifies.
std::vector<ArchSpec> EnumerateArchs(const SearchSpace& space);

struct CostProfile {
  long n_params = 0;
  long n_macs = 0;  // per single-input forward pass
  long memory_bytes_int8 = 0;

  long Flops() const { return 2 * n_macs; }
};

CostProfile CountParamsOps(const ArchSpec& arch);

struct ScreenResult {
  ArchSpec arch;
  double val_mse = 0.0;
  bool diverged = false;
  std::string error;
  CostProfile cost;
  int epochs_run = 0;
};

// Trains every architecture for budget.screen_epochs (no early stopping)
// with one shared seed and returns them stably sorted by validation MSE;
// diverged runs are ranked last.
std::vector<ScreenResult> Screen(const std::vector<ArchSpec>& archs, const Matrix& train,
                                 const Matrix& val, const TrainBudget& budget);

struct Finalist {
  ArchSpec arch;
  std::optional<AeModel> model;  // unset when retraining diverged
  TrainHistory history;
  double val_mse = 0.0;
  bool diverged = false;
  CostProfile cost;
  double f2 = 0.0;   // filled by downstream evaluation
  double f05 = 0.0;
};

// Retrains the top k to budget.retrain_epochs_max with early stopping.
std::vector<Finalist> RetrainTopK(const std::vector<ScreenResult>& ranked, int k,
                                  const Matrix& train, const Matrix& val,
                                  const TrainBudget& budget);

struct SelectionPolicy {
  std::optional<int> max_latent;
  double min_f2_delta = 0.02;
};

// Smallest latent_dim whose F2 is within min_f2_delta of the best F2; ties
// broken by fewer parameters, then descriptor order. Returns an index into
// finalists.
size_t SelectBest(const std::vector<Finalist>& finalists, const SelectionPolicy& policy);

// CSV with one row per screened architecture.
void WriteSearchReport(const std::filesystem::path& path,
                       const std::vector<ScreenResult>& screened,
                       const std::vector<Finalist>& finalists);

}  // namespace jamcomp

#endif  // JAMCOMP_SEARCH_ARCH_SEARCH_H_
