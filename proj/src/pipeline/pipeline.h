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

#ifndef JAMCOMP_PIPELINE_PIPELINE_H_
#define JAMCOMP_PIPELINE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "classify/forest.h"
#include "energy/energy.h"
#include "features/features.h"
#include "json.hpp"
#include "pipeline/workflow.h"
#include "quant/quant.h"
#include "synth/dataset.h"

namespace jamcomp {

inline constexpr char kToolVersion[] = "1.0.0";

// Environment overrides applied by LoadExperimentConfig.
inline constexpr char kEnvOutputDir[] = "JAMCOMP_OUTPUT_DIR";
inline constexpr char kEnvThreads[] = "JAMCOMP_THREADS";

struct ExperimentConfig {
  uint64_t seed = 0;
  std::filesystem::path output_dir = "jamcomp_out";
  int threads = 0;  // 0: hardware concurrency
  Domain domain = Domain::kMixed;
  DatasetSpec dataset;
  SearchConfig search;
  CalibrationConfig quant;
  ForestConfig forest;
  PowerModel power;
  TrafficModel traffic;
  double raw_rate_mb_per_s = 4.0;
  double stated_residual = 0.67;
  nlohmann::json source;  // the parsed config document

  // "seed" is mandatory; every other section is optional.
  static ExperimentConfig FromJson(const nlohmann::json& j);
  // Canonical form: every value resolved, no output dir or thread count.
  nlohmann::json Resolved() const;
  std::string Hash() const;
};

// Reads the config and applies JAMCOMP_OUTPUT_DIR / JAMCOMP_THREADS.
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

struct StageRecord {
  std::string name;
  std::string key;
  std::map<std::string, std::string> inputs;   // relative path -> sha256
  std::map<std::string, std::string> outputs;  // relative path -> sha256
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string config_hash;
  std::string status = "complete";  // or "partial"
  std::string failed_stage;
  std::string error;
  std::vector<StageRecord> stages;

  nlohmann::json ToJson() const;
  static RunManifest FromJson(const nlohmann::json& j);
};

struct RunStats {
  std::vector<std::string> executed;
  std::vector<std::string> cached;
};

// Runs synth -> features -> search -> quantize -> classify -> energy ->
// report under config.output_dir and writes manifest.json there. A stage is
// skipped when its key (stage name, input checksums, config subsection)
// matches the previous run and its outputs still exist; an existing output
// whose checksum changed raises kChecksum. On a stage failure the partial
// manifest is written before the error propagates.
RunManifest RunPipeline(const ExperimentConfig& config, RunStats* stats = nullptr);

// "file" -> sha256 for every regular file under dir, keys relative to base.
std::map<std::string, std::string> ChecksumTree(const std::filesystem::path& dir,
                                                const std::filesystem::path& base);

nlohmann::json FormatVersions();

}  // namespace jamcomp

#endif  // JAMCOMP_PIPELINE_PIPELINE_H_
