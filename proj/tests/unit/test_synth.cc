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

#include <cmath>
#include <complex>
#include <filesystem>
#include <map>
#include <numbers>

#include "doctest.h"
#include "features/features.h"
#include "synth/dataset.h"
#include "synth/signal_synth.h"
#include "unit/oracles.h"

namespace jamcomp {
namespace {

constexpr double kPi = std::numbers::pi;

TEST_CASE("tone: DC tone is constant (1, 0)") {
  const auto x = SynthTone({0.0, 1.0, 0.0}, SampleSpec::FromCount(1000.0, 4));
  REQUIRE(x.size() == 4);
  for (const auto& s : x.samples) {
    CHECK(s.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(s.imag()) < 1e-12);
  }
}

TEST_CASE("tone: quarter-rate cosine on the I channel") {
  const auto x = SynthTone({250.0, 1.0, 0.0}, SampleSpec::FromCount(1000.0, 4));
  const double expect[4] = {1.0, 0.0, -1.0, 0.0};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(x.samples[k].real() - expect[k]) < 1e-12);
}

TEST_CASE("tone: matches the quadrature formula evaluated per sample") {
  // I(t) cos(wt) + Q(t) sin(wt) with I = 0.7, Q = -0.4 as the in-phase
  // channel, and its Hilbert partner as the quadrature channel.
  const double fs = 8000.0, f = 1000.0, ai = 0.7, aq = -0.4;
  const auto x = SynthTone({f, ai, aq}, SampleSpec::FromCount(fs, 8));
  for (int k = 0; k < 8; ++k) {
    const double w = 2.0 * kPi * f * k / fs;
    CHECK(std::abs(x.samples[k].real() - (ai * std::cos(w) + aq * std::sin(w))) < 1e-12);
    CHECK(std::abs(x.samples[k].imag() - (ai * std::sin(w) - aq * std::cos(w))) < 1e-12);
  }
}

TEST_CASE("tone: polar form round-trips") {
  const auto t = ToneSpec::FromPolar(10.0, 2.5, 0.3);
  CHECK(t.Amplitude() == doctest::Approx(2.5));
  CHECK(t.Phase() == doctest::Approx(0.3));
}

TEST_CASE("tone: non-positive sample rate is an invalid spec") {
  try {
    SynthTone({1.0, 1.0, 0.0}, SampleSpec{0.0, 1.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidSpec);
  }
  CHECK_THROWS_AS(SynthTone({1.0, 1.0, 0.0}, SampleSpec{-5.0, 1.0}), Error);
}

TEST_CASE("chirp: phase increment at the final sample equals 2 pi f_stop / fs") {
  // Sweeping 0 -> fs/4 ends at an instantaneous frequency of fs/4, i.e. a
  // per-sample phase advance of pi/2.
  const double fs = 1e6;
  const int n = 4096;
  WaveformSpec w{ChirpParams{0.0, fs / 4, n / fs, 1.0}};
  const auto x = SynthWaveform(w, SampleSpec::FromCount(fs, n), 1);
  const double inc = std::arg(x.samples[n - 1] * std::conj(x.samples[n - 2]));
  CHECK(std::abs(inc - kPi / 2) < 1e-6);
  // The advance into sample k uses the instantaneous frequency at k.
  const double second = std::arg(x.samples[2] * std::conj(x.samples[1]));
  CHECK(std::abs(second - 2.0 * kPi * (fs / 4) * 2.0 / (n - 1) / fs) < 1e-9);
}

TEST_CASE("pulsed: duty 0.25 with a 100-sample period gives 25 nonzero samples per period") {
  const double fs = 1e5;
  WaveformSpec w{PulsedParams{0.25, fs / 100, 0.0, 1.0}};
  const auto x = SynthWaveform(w, SampleSpec::FromCount(fs, 1000), 3);
  for (int period = 0; period < 10; ++period) {
    int nonzero = 0;
    for (int k = 0; k < 100; ++k) nonzero += std::abs(x.samples[period * 100 + k]) > 0.0;
    CHECK(nonzero == 25);
  }
}

TEST_CASE("multitone: spectrum shows exactly two dominant bins") {
  const double fs = 1.024e6;
  MultitoneParams p;
  // Put each tone at the center of a 128-bin group.
  const double group = fs / kSpectralBins;
  p.tones = {{fs / 8 + group / 2, 1.0, 0.0}, {fs / 4 + group / 2, 1.0, 0.0}};
  const auto x = SynthWaveform(WaveformSpec{p}, SampleSpec::FromCount(fs, 4096), 0);
  const auto frame = PowerSpectrumBins(x);
  std::vector<double> sorted = frame.bins;
  std::sort(sorted.rbegin(), sorted.rend());
  CHECK(sorted[1] - sorted[2] > 20.0);
  CHECK(sorted[0] - sorted[1] < 1.0);
}

TEST_CASE("synth: unknown class name is an unsupported waveform") {
  try {
    ParseWaveformClass("sawtooth");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedWaveform);
  }
}

TEST_CASE("synth: identical seeds give identical buffers for every class") {
  Rng rng(5);
  for (int c = 0; c < kNumWaveformClasses; ++c) {
    Rng a(11), b(11);
    const auto wa = RandomWaveform(static_cast<WaveformClass>(c), 1e6, 1e-3, a);
    const auto wb = RandomWaveform(static_cast<WaveformClass>(c), 1e6, 1e-3, b);
    const auto xa = SynthWaveform(wa, SampleSpec::FromCount(1e6, 2048), 9);
    const auto xb = SynthWaveform(wb, SampleSpec::FromCount(1e6, 2048), 9);
    CHECK(xa.samples == xb.samples);
    CHECK(wa.label() == static_cast<WaveformClass>(c));
  }
}

TEST_CASE("channel: single unit tap, 0 dB, no noise is the identity") {
  const auto x = SynthTone({123.0, 0.8, 0.2}, SampleSpec::FromCount(1000.0, 64));
  ChannelSpec ch;
  ch.multipath_taps = {{0, {1.0, 0.0}}};
  CHECK(ApplyChannel(x, ch, 1).samples == x.samples);
}

TEST_CASE("channel: 20 dB attenuation scales every sample by 0.1") {
  const auto x = SynthTone({77.0, 1.0, 0.5}, SampleSpec::FromCount(1000.0, 64));
  ChannelSpec ch;
  ch.attenuation_db = 20.0;
  const auto y = ApplyChannel(x, ch, 1);
  for (size_t k = 0; k < x.size(); ++k) {
    CHECK(std::abs(y.samples[k] - 0.1 * x.samples[k]) < 1e-15);
  }
}

TEST_CASE("channel: two taps equal a naive convolution") {
  Rng rng(3);
  IqBuffer x{std::vector<Complex>(50), SampleSpec::FromCount(1.0e3, 50)};
  for (auto& s : x.samples) s = {rng.Normal(), rng.Normal()};
  ChannelSpec ch;
  ch.multipath_taps = {{0, {1.0, 0.0}}, {5, {0.5, 0.0}}};
  const auto y = ApplyChannel(x, ch, 0);
  const std::vector<std::pair<int, Complex>> h = {{0, 1.0}, {5, 0.5}};
  for (int n = 0; n < 50; ++n) {
    Complex acc = 0.0;
    for (int k = 0; k < 50; ++k) {
      for (const auto& [d, g] : h) {
        if (n - k == d) acc += g * x.samples[k];
      }
    }
    CHECK(std::abs(y.samples[n] - acc) < 1e-12);
  }
}

TEST_CASE("channel: tap delay at or beyond the buffer length is rejected") {
  const auto x = SynthTone({1.0, 1.0, 0.0}, SampleSpec::FromCount(100.0, 10));
  ChannelSpec ch;
  ch.multipath_taps = {{0, {1.0, 0.0}}, {10, {0.5, 0.0}}};
  try {
    ApplyChannel(x, ch, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidChannel);
  }
}

TEST_CASE("channel: noise power follows the jammer-to-noise ratio") {
  IqBuffer x{std::vector<Complex>(200000), SampleSpec::FromCount(1e6, 200000)};
  ChannelSpec ch;
  ch.jsr_db = 10.0;
  const auto y = ApplyChannel(x, ch, 4);
  CHECK(y.Energy() / y.size() == doctest::Approx(0.1).epsilon(0.02));
}

TEST_CASE("alias: Nyquist edge maps to itself") {
  CHECK(AliasFrequency(500.0, 1000.0) == doctest::Approx(500.0));
}

TEST_CASE("alias: fs = 1.5 f folds to 0.5 f") {
  const double f = 1000.0;
  CHECK(AliasFrequency(f, 1.5 * f) == doctest::Approx(0.5 * f));
}

TEST_CASE("alias: 0.9 fs and 0.1 fs agree sample by sample") {
  const double fs = 1000.0;
  const double fa = AliasFrequency(0.9 * fs, fs);
  CHECK(fa == doctest::Approx(0.1 * fs));
  // Real cosines at f and at its alias hit the same samples.
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double t = k / fs;
    worst = std::max(worst, std::abs(std::cos(2 * kPi * 0.9 * fs * t) -
                                     std::cos(2 * kPi * fa * t)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("dataset: 7 classes x 10 gives 70 snapshots, 10 per label") {
  const auto spec = DefaultDatasetSpec(10, 1);
  REQUIRE(spec.classes.size() == 7);
  const auto data = MakeDataset(spec);
  CHECK(data.size() == 70);
  std::map<WaveformClass, int> hist;
  for (const auto& s : data) hist[s.waveform]++;
  for (auto c : spec.classes) CHECK(hist[c] == 10);
}

TEST_CASE("dataset: class histogram equals the requested counts for random specs") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    auto spec = DefaultDatasetSpec(1 + static_cast<int>(rng.UniformInt(6)), trial);
    spec.n_samples = 1024;
    const int keep = 1 + static_cast<int>(rng.UniformInt(7));
    spec.classes.resize(keep);
    const auto data = MakeDataset(spec);
    std::map<WaveformClass, int> hist;
    for (const auto& s : data) hist[s.waveform]++;
    CHECK(data.size() == spec.classes.size() * spec.per_class_count);
    for (auto c : spec.classes) CHECK(hist[c] == spec.per_class_count);
  }
}

TEST_CASE("dataset: same seed twice gives bit-identical buffers") {
  auto spec = DefaultDatasetSpec(3, 42);
  spec.n_samples = 2048;
  const auto a = MakeDataset(spec);
  const auto b = MakeDataset(spec);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].iq.samples == b[i].iq.samples);
}

TEST_CASE("dataset: empty class list is an invalid spec") {
  auto spec = DefaultDatasetSpec(3, 1);
  spec.classes.clear();
  try {
    MakeDataset(spec);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidSpec);
  }
}

TEST_CASE("dataset: scenarios cycle and labels are consistent") {
  auto spec = DefaultDatasetSpec(10, 2);
  spec.n_samples = 1024;
  const auto data = MakeDataset(spec);
  for (const auto& s : data) {
    CHECK(s.detection == (s.waveform == WaveformClass::kClean ? DetectionLabel::kClean
                                                              : DetectionLabel::kInterference));
    CHECK(s.scenario_id >= 0);
    CHECK(s.scenario_id < 10);
  }
  const auto split = SplitByScenario([&] {
    std::vector<int> ids;
    for (const auto& s : data) ids.push_back(s.scenario_id);
    return ids;
  }(), spec.test_scenarios);
  CHECK(split.train.size() + split.test.size() == data.size());
  for (int i : split.test) {
    CHECK((data[i].scenario_id == 4 || data[i].scenario_id == 9));
  }
}

TEST_CASE("dataset: directory round trip keeps labels and float32 samples") {
  auto spec = DefaultDatasetSpec(2, 8);
  spec.n_samples = 1024;
  const auto data = MakeDataset(spec);
  const auto dir = std::filesystem::temp_directory_path() / "jamcomp_test_dataset";
  std::filesystem::remove_all(dir);
  WriteDataset(dir, data);
  const auto back = ReadDataset(dir);
  REQUIRE(back.size() == data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    // IQ files store float32 components.
    REQUIRE(back[i].iq.size() == data[i].iq.size());
    bool exact = true;
    for (size_t k = 0; k < data[i].iq.size(); ++k) {
      const auto& s = data[i].iq.samples[k];
      exact &= back[i].iq.samples[k] ==
               Complex(static_cast<float>(s.real()), static_cast<float>(s.imag()));
    }
    CHECK(exact);
    CHECK(back[i].waveform == data[i].waveform);
    CHECK(back[i].scenario_id == data[i].scenario_id);
    CHECK(back[i].iq.spec.sample_rate_hz == data[i].iq.spec.sample_rate_hz);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace jamcomp
