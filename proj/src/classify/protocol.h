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

#ifndef JAMCOMP_CLASSIFY_PROTOCOL_H_
#define JAMCOMP_CLASSIFY_PROTOCOL_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "classify/forest.h"
#include "classify/metrics.h"
#include "features/features.h"
#include "json.hpp"
#include "nn/ae_model.h"
#include "quant/quant.h"

namespace jamcomp {

// Model metadata keys written at training time.
inline constexpr char kMetaNormStats[] = "norm_stats";
inline constexpr char kMetaTrainingScenarios[] = "training_scenarios";
inline constexpr char kMetaDomain[] = "domain";

enum class Task { kDetection, kClassification };
enum class ModelVariant { kRaw, kFloatRecon, kInt8Recon };

const char* TaskName(Task t);
const char* ModelVariantName(ModelVariant v);

// Throws kLeakage when any test scenario id is listed among the model's
// training scenarios.
void CheckLeakage(const nlohmann::json& metadata, std::span<const int> test_scenarios);

// Normalization stored with the model, or fitted on train when absent.
NormStats ModelNormStats(const AeModel& model, const Matrix& train);

struct TaskResult {
  Task task = Task::kDetection;
  ModelVariant variant = ModelVariant::kRaw;
  ConfusionMatrix cm;
  FBetaScore f2;
  FBetaScore f05;
};

// Trains a forest on (train_x, train_labels) and scores it on the test set.
TaskResult EvaluateRepresentation(const Matrix& train_x, std::span<const int> train_labels,
                                  const Matrix& test_x, std::span<const int> test_labels,
                                  int n_classes, const ForestConfig& forest);

struct EvaluationReport {
  std::vector<TaskResult> results;  // 3 variants x 2 tasks
  double recon_mse_float = 0.0;     // on the normalized test set
  double recon_mse_int8 = 0.0;

  const TaskResult& Get(Task task, ModelVariant variant) const;
  // Array of {task, model_variant, f2, f05, per_class, confusion}.
  nlohmann::json ToJson() const;
  // metrics.json plus cm_<task>_<variant>.csv/.svg per result.
  void WriteArtifacts(const std::filesystem::path& dir) const;
};

// Raw features, float-AE reconstructions and int8-AE reconstructions each
// get their own forest, trained on the train split and tested on the test
// split, for both detection and waveform classification.
EvaluationReport EvaluateProtocol(const FeatureSet& train, const FeatureSet& test,
                                  const AeModel& ae, const QuantizedModel& qae,
                                  const ForestConfig& forest);

std::vector<std::string> TaskClassNames(Task t);

}  // namespace jamcomp

#endif  // JAMCOMP_CLASSIFY_PROTOCOL_H_
