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

#ifndef JAMCOMP_PIPELINE_WORKFLOW_H_
#define JAMCOMP_PIPELINE_WORKFLOW_H_

#include <filesystem>
#include <string>
#include <vector>

#include "classify/forest.h"
#include "classify/protocol.h"
#include "features/features.h"
#include "json.hpp"
#include "nn/ae_model.h"
#include "nn/train.h"
#include "quant/quant.h"
#include "search/arch_search.h"
#include "synth/dataset.h"

namespace jamcomp {

// {"classes": [...], "per_class", "n_samples", "sample_rate_hz", "jsr_db",
//  "test_scenarios", "seed"}; absent keys take the defaults.
DatasetSpec DatasetSpecFromJson(const nlohmann::json& j, uint64_t default_seed);
nlohmann::json DatasetSpecToJson(const DatasetSpec& spec);

struct SplitFeatures {
  FeatureSet train;
  FeatureSet test;
};
SplitFeatures SplitFeatureSet(const FeatureSet& set, const std::vector<int>& test_scenarios);

// Normalization fitted on train, a seeded validation split, full training
// with early stopping; metadata records norm stats, training scenarios,
// domain and the architecture descriptor.
TrainResult TrainOnFeatures(const FeatureSet& train, const ArchSpec& arch,
                            const TrainBudget& budget);

struct SearchConfig {
  SearchSpace space;
  int top_k = 14;
  int max_archs = 0;  // 0: the whole enumerated space
  TrainBudget budget;
  SelectionPolicy selection;
  ForestConfig selection_forest;  // scores finalists on the validation split

  nlohmann::json ToJson() const;
  static SearchConfig FromJson(const nlohmann::json& j, Domain domain, uint64_t default_seed);
};

struct SearchOutcome {
  std::vector<ScreenResult> screened;
  std::vector<Finalist> finalists;
  size_t best = 0;
  AeModel model;  // selected finalist with metadata
};

SearchOutcome RunSearch(const FeatureSet& train, const SearchConfig& config);

struct QuantizeOutcome {
  QuantizedModel model;
  QuantReport report;
};

// Calibrates on evenly strided normalized training rows and reports on the
// normalized evaluation set.
QuantizeOutcome QuantizeForFeatures(const AeModel& model, const FeatureSet& train,
                                    const FeatureSet& eval, const CalibrationConfig& config);

// Renders metrics.json / quant_report.json / energy.json / search_report.csv
// found under dir (recursively) into markdown and renders a confusion heatmap
// per result into heatmap_dir (next to each metrics.json when empty). Throws
// kNoArtifacts when nothing is found.
std::string RenderReport(const std::filesystem::path& dir,
                         const std::filesystem::path& heatmap_dir = {});

}  // namespace jamcomp

#endif  // JAMCOMP_PIPELINE_WORKFLOW_H_
