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

#include "synth/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include "common/binary_io.h"
#include "common/error.h"
#include "common/parallel.h"
#include "json.hpp"

namespace jamcomp {
namespace {

using nlohmann::json;

constexpr char kIqMagic[5] = "IQF1";

double Db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

void DatasetSpec::Validate() const {
  Require(!classes.empty(), ErrorCode::kInvalidSpec, "empty class list");
  Require(per_class_count >= 1, ErrorCode::kInvalidSpec, "per_class_count must be >= 1");
  Require(!scenarios.empty(), ErrorCode::kInvalidSpec, "empty scenario list");
  SampleSpec::FromCount(sample_rate_hz, n_samples).Validate();
}

std::vector<WaveformClass> JammerClasses() {
  return {WaveformClass::kNoise,     WaveformClass::kChirp,
          WaveformClass::kMultitone, WaveformClass::kPulsed,
          WaveformClass::kFrequencyHopper, WaveformClass::kModulated};
}

std::vector<ScenarioSpec> DefaultScenarios() {
  const std::vector<std::vector<MultipathTap>> profiles = {
      {},
      {{0, {1.0, 0.0}}, {3, std::polar(0.4, 0.7)}},
      {{0, {1.0, 0.0}}, {7, std::polar(0.3, -1.2)}},
      {{0, {1.0, 0.0}}, {2, std::polar(0.5, 2.0)}, {11, std::polar(0.2, 0.3)}},
      {{0, {1.0, 0.0}}, {5, std::polar(0.5, -2.5)}},
  };
  std::vector<ScenarioSpec> out;
  for (int id = 0; id < 10; ++id) {
    out.push_back({id, id % 2 == 0 ? 20.0 : 26.0, profiles[id % profiles.size()]});
  }
  return out;
}

DatasetSpec DefaultDatasetSpec(int per_class_count, uint64_t seed) {
  DatasetSpec spec;
  spec.classes = {WaveformClass::kClean};
  for (auto c : JammerClasses()) spec.classes.push_back(c);
  spec.per_class_count = per_class_count;
  spec.scenarios = DefaultScenarios();
  spec.test_scenarios = {4, 9};
  spec.seed = seed;
  return spec;
}

WaveformSpec RandomWaveform(WaveformClass c, double fs, double noise_floor_power,
                            Rng& rng) {
  WaveformSpec w;
  switch (c) {
    case WaveformClass::kClean:
      w.params = CleanParams{noise_floor_power};
      break;
    case WaveformClass::kNoise: {
      const double bw = rng.Uniform(0.05, 0.5);
      const double center = rng.Uniform(-0.5 + bw / 2, 0.5 - bw / 2) * 0.9;
      w.params = NoiseParams{bw * fs, center * fs, 1.0};
      break;
    }
    case WaveformClass::kChirp: {
      double lo = rng.Uniform(-0.45, -0.05);
      double hi = rng.Uniform(0.05, 0.45);
      if (rng.Uniform() < 0.5) std::swap(lo, hi);
      const double sweep = std::round(rng.Uniform(128.0, 2048.0));
      w.params = ChirpParams{lo * fs, hi * fs, sweep / fs, 1.0};
      break;
    }
    case WaveformClass::kMultitone: {
      const int n = 1 + static_cast<int>(rng.UniformInt(4));
      MultitoneParams p;
      for (int i = 0; i < n; ++i) {
        const double f = rng.Uniform(-0.45, 0.45) * fs;
        const double phase = rng.Uniform(-std::numbers::pi, std::numbers::pi);
        p.tones.push_back(ToneSpec::FromPolar(f, 1.0 / std::sqrt(n), phase));
      }
      w.params = std::move(p);
      break;
    }
    case WaveformClass::kPulsed: {
      const double period = std::round(rng.Uniform(64.0, 1024.0));
      w.params = PulsedParams{rng.Uniform(0.05, 0.5), fs / period,
                              rng.Uniform(-0.4, 0.4) * fs, 1.0};
      break;
    }
    case WaveformClass::kFrequencyHopper: {
      const int n = 4 + static_cast<int>(rng.UniformInt(5));
      HopperParams p;
      for (int i = 0; i < n; ++i) p.hop_set_hz.push_back(rng.Uniform(-0.45, 0.45) * fs);
      p.dwell_s = std::round(rng.Uniform(128.0, 1024.0)) / fs;
      w.params = std::move(p);
      break;
    }
    case WaveformClass::kModulated: {
      static constexpr int kOrders[] = {2, 4, 8};
      w.params = ModulatedParams{fs / rng.Uniform(2.0, 16.0),
                                 kOrders[rng.UniformInt(3)],
                                 rng.Uniform(-0.25, 0.25) * fs, 1.0};
      break;
    }
  }
  return w;
}

LabeledSnapshot MakeSnapshot(WaveformClass c, const ScenarioSpec& scenario,
                             double sample_rate_hz, int n_samples, double jsr_db,
                             uint64_t seed) {
  const double noise_floor = std::isfinite(jsr_db) ? Db(-jsr_db) : 0.0;
  Rng param_rng(MixSeed(seed, 0));
  const WaveformSpec w = RandomWaveform(c, sample_rate_hz, noise_floor, param_rng);
  const IqBuffer clean =
      SynthWaveform(w, SampleSpec::FromCount(sample_rate_hz, n_samples), MixSeed(seed, 1));
  ChannelSpec ch;
  ch.attenuation_db = scenario.attenuation_db;
  ch.jsr_db = jsr_db;
  ch.multipath_taps = scenario.taps;
  LabeledSnapshot snap;
  snap.iq = ApplyChannel(clean, ch, MixSeed(seed, 2));
  snap.waveform = c;
  snap.detection =
      c == WaveformClass::kClean ? DetectionLabel::kClean : DetectionLabel::kInterference;
  snap.scenario_id = scenario.id;
  snap.seed = seed;
  return snap;
}

std::vector<LabeledSnapshot> MakeDataset(const DatasetSpec& spec) {
  spec.Validate();
  const int n_classes = static_cast<int>(spec.classes.size());
  const int total = n_classes * spec.per_class_count;
  std::vector<LabeledSnapshot> out(total);
  ParallelFor(total, [&](int idx) {
    const int ci = idx / spec.per_class_count;
    const int i = idx % spec.per_class_count;
    const uint64_t seed =
        MixSeed(spec.seed, (static_cast<uint64_t>(ci) << 32) | static_cast<uint64_t>(i));
    out[idx] = MakeSnapshot(spec.classes[ci], spec.scenarios[i % spec.scenarios.size()],
                            spec.sample_rate_hz, spec.n_samples, spec.jsr_db, seed);
  });
  return out;
}

SplitIndices SplitByScenario(const std::vector<int>& scenario_ids,
                             const std::vector<int>& test_scenarios) {
  const std::set<int> test(test_scenarios.begin(), test_scenarios.end());
  SplitIndices split;
  for (int i = 0; i < static_cast<int>(scenario_ids.size()); ++i) {
    (test.count(scenario_ids[i]) ? split.test : split.train).push_back(i);
  }
  return split;
}

const char* DetectionLabelName(DetectionLabel d) {
  return d == DetectionLabel::kClean ? "clean" : "interference";
}

void WriteIqFile(const std::filesystem::path& path, const IqBuffer& iq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  WriteMagic(out, kIqMagic);
  WritePod<uint32_t>(out, static_cast<uint32_t>(iq.size()));
  WritePod<float>(out, static_cast<float>(iq.spec.sample_rate_hz));
  WritePod<uint32_t>(out, 0);
  for (const auto& s : iq.samples) {
    WritePod<float>(out, static_cast<float>(s.real()));
    WritePod<float>(out, static_cast<float>(s.imag()));
  }
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

IqBuffer ReadIqFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  ExpectMagic(in, kIqMagic);
  const uint32_t n = ReadPod<uint32_t>(in);
  const float fs = ReadPod<float>(in);
  ReadPod<uint32_t>(in);
  IqBuffer iq;
  iq.spec = SampleSpec::FromCount(fs, static_cast<int>(n));
  iq.samples.resize(n);
  for (auto& s : iq.samples) {
    const float i = ReadPod<float>(in);
    const float q = ReadPod<float>(in);
    s = {i, q};
  }
  return iq;
}

void WriteDataset(const std::filesystem::path& dir,
                  const std::vector<LabeledSnapshot>& snapshots) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.jsonl");
  if (!manifest) Fail(ErrorCode::kIo, "cannot write manifest in " + dir.string());
  for (size_t i = 0; i < snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "snapshot_%05zu.iq", i);
    const auto& s = snapshots[i];
    WriteIqFile(dir / name, s.iq);
    json rec = {{"file", name},
                {"class", WaveformClassName(s.waveform)},
                {"detection", DetectionLabelName(s.detection)},
                {"scenario_id", s.scenario_id},
                {"seed", s.seed}};
    manifest << rec.dump() << '\n';
  }
}

std::vector<LabeledSnapshot> ReadDataset(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.jsonl");
  if (!manifest) Fail(ErrorCode::kIo, "no manifest.jsonl in " + dir.string());
  std::vector<LabeledSnapshot> out;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      Fail(ErrorCode::kFormat, std::string("bad manifest record: ") + e.what());
    }
    LabeledSnapshot s;
    s.iq = ReadIqFile(dir / rec.at("file").get<std::string>());
    s.waveform = ParseWaveformClass(rec.at("class").get<std::string>());
    s.detection = rec.at("detection").get<std::string>() == "clean"
                      ? DetectionLabel::kClean
                      : DetectionLabel::kInterference;
    s.scenario_id = rec.at("scenario_id").get<int>();
    s.seed = rec.at("seed").get<uint64_t>();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace jamcomp
