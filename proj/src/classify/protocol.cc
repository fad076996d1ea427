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

#include "classify/protocol.h"

#include <fstream>
#include <set>

#include "common/error.h"
#include "synth/dataset.h"
#include "synth/signal_synth.h"

namespace jamcomp {

using nlohmann::json;

namespace {

int TaskClasses(Task t) { return t == Task::kDetection ? 2 : kNumWaveformClasses; }

double Mse(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return a.size() ? s / static_cast<double>(a.size()) : 0.0;
}

json ScoreJson(const TaskResult& r) {
  const auto names = TaskClassNames(r.task);
  json per_class = json::array();
  for (size_t i = 0; i < r.f2.per_class.size(); ++i) {
    const auto& c2 = r.f2.per_class[i];
    per_class.push_back({{"class", names[c2.label]},
                         {"precision", c2.precision},
                         {"recall", c2.recall},
                         {"f2", c2.fbeta},
                         {"f05", r.f05.per_class[i].fbeta},
                         {"support", c2.support}});
  }
  return json{{"task", TaskName(r.task)},       {"model_variant", ModelVariantName(r.variant)},
              {"f2", r.f2.macro},               {"f05", r.f05.macro},
              {"per_class", per_class},         {"confusion", r.cm.ToJson()}};
}

}  // namespace

const char* TaskName(Task t) {
  return t == Task::kDetection ? "detection" : "classification";
}

const char* ModelVariantName(ModelVariant v) {
  switch (v) {
    case ModelVariant::kRaw:
      return "raw";
    case ModelVariant::kFloatRecon:
      return "float-recon";
    case ModelVariant::kInt8Recon:
      return "int8-recon";
  }
  return "?";
}

std::vector<std::string> TaskClassNames(Task t) {
  std::vector<std::string> names;
  if (t == Task::kDetection) {
    names = {DetectionLabelName(DetectionLabel::kInterference),
             DetectionLabelName(DetectionLabel::kClean)};
  } else {
    for (int c = 0; c < kNumWaveformClasses; ++c) {
      names.push_back(WaveformClassName(static_cast<WaveformClass>(c)));
    }
  }
  return names;
}

void CheckLeakage(const json& metadata, std::span<const int> test_scenarios) {
  if (!metadata.is_object() || !metadata.contains(kMetaTrainingScenarios)) return;
  std::set<int> trained;
  for (const auto& id : metadata[kMetaTrainingScenarios]) trained.insert(id.get<int>());
  for (int id : test_scenarios) {
    if (trained.count(id)) {
      Fail(ErrorCode::kLeakage,
           "test scenario " + std::to_string(id) + " was used to train the autoencoder");
    }
  }
}

NormStats ModelNormStats(const AeModel& model, const Matrix& train) {
  if (model.metadata.contains(kMetaNormStats)) {
    return NormStats::FromJson(model.metadata[kMetaNormStats]);
  }
  return FitNormStats(train);
}

TaskResult EvaluateRepresentation(const Matrix& train_x, std::span<const int> train_labels,
                                  const Matrix& test_x, std::span<const int> test_labels,
                                  int n_classes, const ForestConfig& forest) {
  const auto rf = RandomForest::Train(train_x, train_labels, n_classes, forest);
  const auto pred = rf.PredictBatch(test_x);
  TaskResult r;
  r.cm = ConfusionMatrix::FromLabels(test_labels, pred, n_classes);
  r.f2 = FBeta(r.cm, 2.0);
  r.f05 = FBeta(r.cm, 0.5);
  return r;
}

const TaskResult& EvaluationReport::Get(Task task, ModelVariant variant) const {
  for (const auto& r : results) {
    if (r.task == task && r.variant == variant) return r;
  }
  Fail(ErrorCode::kInvalidArgument, std::string("no result for ") + TaskName(task) + "/" +
                                        ModelVariantName(variant));
}

json EvaluationReport::ToJson() const {
  json arr = json::array();
  for (const auto& r : results) arr.push_back(ScoreJson(r));
  return json{{"results", arr},
              {"recon_mse_float", recon_mse_float},
              {"recon_mse_int8", recon_mse_int8}};
}

void EvaluationReport::WriteArtifacts(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "metrics.json");
    if (!out) Fail(ErrorCode::kIo, "cannot write " + (dir / "metrics.json").string());
    out << ToJson().dump(2) << '\n';
  }
  for (const auto& r : results) {
    const std::string stem = std::string("cm_") + TaskName(r.task) + "_" + ModelVariantName(r.variant);
    const auto names = TaskClassNames(r.task);
    WriteConfusionCsv(dir / (stem + ".csv"), r.cm, names);
    char title[128];
    std::snprintf(title, sizeof(title), "%s / %s  F2=%.3f  F0.5=%.3f", TaskName(r.task),
                  ModelVariantName(r.variant), r.f2.macro, r.f05.macro);
    WriteConfusionSvg(dir / (stem + ".svg"), r.cm, names, title);
  }
}

EvaluationReport EvaluateProtocol(const FeatureSet& train, const FeatureSet& test,
                                  const AeModel& ae, const QuantizedModel& qae,
                                  const ForestConfig& forest) {
  Require(train.size() > 0 && test.size() > 0, ErrorCode::kInvalidArgument,
          "protocol needs non-empty train and test sets");
  Require(train.values.cols() == ae.input_dim() && test.values.cols() == ae.input_dim() &&
              qae.input_dim() == ae.input_dim(),
          ErrorCode::kShape, "feature width does not match the autoencoders");
  CheckLeakage(ae.metadata, test.scenario_ids);
  CheckLeakage(qae.metadata, test.scenario_ids);

  const NormStats norm = ModelNormStats(ae, train.values);
  const Matrix train_n = ApplyNormStats(norm, train.values).values;
  const Matrix test_n = ApplyNormStats(norm, test.values).values;
  const Matrix train_f = ae.Infer(train_n).reconstruction;
  const Matrix test_f = ae.Infer(test_n).reconstruction;
  const Matrix train_q = Int8Forward(qae, train_n).reconstruction;
  const Matrix test_q = Int8Forward(qae, test_n).reconstruction;

  EvaluationReport report;
  report.recon_mse_float = Mse(test_f, test_n);
  report.recon_mse_int8 = Mse(test_q, test_n);
  struct Rep {
    ModelVariant variant;
    const Matrix* train;
    const Matrix* test;
  };
  const Rep reps[] = {{ModelVariant::kRaw, &train.values, &test.values},
                      {ModelVariant::kFloatRecon, &train_f, &test_f},
                      {ModelVariant::kInt8Recon, &train_q, &test_q}};
  for (Task task : {Task::kDetection, Task::kClassification}) {
    const auto& ytr = task == Task::kDetection ? train.detection_labels : train.class_labels;
    const auto& yte = task == Task::kDetection ? test.detection_labels : test.class_labels;
    for (const auto& rep : reps) {
      TaskResult r = EvaluateRepresentation(*rep.train, ytr, *rep.test, yte, TaskClasses(task),
                                            forest);
      r.task = task;
      r.variant = rep.variant;
      report.results.push_back(std::move(r));
    }
  }
  return report;
}

}  // namespace jamcomp
