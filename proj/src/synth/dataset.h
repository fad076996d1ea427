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

#ifndef JAMCOMP_SYNTH_DATASET_H_
#define JAMCOMP_SYNTH_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "common/rng.h"
#include "synth/signal_synth.h"

namespace jamcomp {

enum class DetectionLabel { kInterference = 0, kClean = 1 };

struct LabeledSnapshot {
  IqBuffer iq;
  WaveformClass waveform = WaveformClass::kClean;
  DetectionLabel detection = DetectionLabel::kClean;
  int scenario_id = 0;
  uint64_t seed = 0;
};

// A recording condition: attenuation plus a fixed multipath profile.
struct ScenarioSpec {
  int id = 0;
  double attenuation_db = 0.0;
  std::vector<MultipathTap> taps;
};

struct DatasetSpec {
  std::vector<WaveformClass> classes;
  int per_class_count = 0;
  // Snapshot i of every class is recorded under scenarios[i % size].
  std::vector<ScenarioSpec> scenarios;
  // Scenario ids held out for testing.
  std::vector<int> test_scenarios;
  double sample_rate_hz = 10e6;
  int n_samples = 8192;
  // Jammer-to-noise ratio before attenuation (jammers are unit power).
  double jsr_db = 40.0;
  uint64_t seed = 0;

  void Validate() const;
};

// Seven classes, ten scenarios alternating -20 dB / -26 dB attenuation with
// assorted multipath profiles; scenarios 4 and 9 are held out.
DatasetSpec DefaultDatasetSpec(int per_class_count, uint64_t seed);
std::vector<WaveformClass> JammerClasses();  // the six non-clean classes
std::vector<ScenarioSpec> DefaultScenarios();

// Draws class-specific parameters from the built-in grids.
WaveformSpec RandomWaveform(WaveformClass c, double sample_rate_hz,
                            double noise_floor_power, Rng& rng);

// One snapshot: class parameters from Rng(MixSeed(seed, 0)), waveform noise
// from MixSeed(seed, 1), channel noise from MixSeed(seed, 2).
LabeledSnapshot MakeSnapshot(WaveformClass c, const ScenarioSpec& scenario,
                             double sample_rate_hz, int n_samples, double jsr_db,
                             uint64_t seed);

// Per-snapshot seed: MixSeed(spec.seed, class_position << 32 | index).
std::vector<LabeledSnapshot> MakeDataset(const DatasetSpec& spec);

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

SplitIndices SplitByScenario(const std::vector<int>& scenario_ids,
                             const std::vector<int>& test_scenarios);

// IQF1: 16-byte little-endian header (magic, u32 count, f32 fs, u32 0)
// followed by interleaved f32 I/Q.
void WriteIqFile(const std::filesystem::path& path, const IqBuffer& iq);
IqBuffer ReadIqFile(const std::filesystem::path& path);

// Writes snapshot_NNNNN.iq files plus manifest.jsonl with one
// {file, class, detection, scenario_id, seed} record per line.
void WriteDataset(const std::filesystem::path& dir,
                  const std::vector<LabeledSnapshot>& snapshots);
std::vector<LabeledSnapshot> ReadDataset(const std::filesystem::path& dir);

const char* DetectionLabelName(DetectionLabel d);

}  // namespace jamcomp

#endif  // JAMCOMP_SYNTH_DATASET_H_
