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

#include "synth/signal_synth.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "common/error.h"
#include "common/rng.h"

namespace jamcomp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void CheckFrequency(double f, const SampleSpec& spec, bool allow_aliasing,
                    const char* what) {
  if (allow_aliasing) return;
  Require(std::abs(f) < 0.5 * spec.sample_rate_hz, ErrorCode::kInvalidSpec,
          std::string(what) + " must be below the Nyquist frequency");
}

Complex Cis(double phase) { return {std::cos(phase), std::sin(phase)}; }

// Windowed-sinc low-pass with unit energy so white input of power P yields
// output of power P.
std::vector<double> LowPassTaps(double cutoff_ratio, int n_taps) {
  std::vector<double> h(n_taps);
  const int mid = n_taps / 2;
  double energy = 0.0;
  for (int i = 0; i < n_taps; ++i) {
    const double m = i - mid;
    const double sinc =
        m == 0 ? 2.0 * cutoff_ratio
               : std::sin(kTwoPi * cutoff_ratio * m) / (std::numbers::pi * m);
    const double hamming = 0.54 - 0.46 * std::cos(kTwoPi * i / (n_taps - 1));
    h[i] = sinc * hamming;
    energy += h[i] * h[i];
  }
  const double norm = 1.0 / std::sqrt(energy);
  for (double& v : h) v *= norm;
  return h;
}

void SynthClean(const CleanParams& p, Rng& rng, std::vector<Complex>& out) {
  Require(p.noise_power >= 0.0, ErrorCode::kInvalidSpec, "negative noise power");
  const double sigma = std::sqrt(0.5 * p.noise_power);
  for (auto& s : out) {
    const double re = rng.Normal();
    s = {sigma * re, sigma * rng.Normal()};
  }
}

void SynthNoise(const NoiseParams& p, const SampleSpec& spec, bool alias,
                Rng& rng, std::vector<Complex>& out) {
  Require(p.power >= 0.0 && p.bandwidth_hz > 0.0, ErrorCode::kInvalidSpec,
          "noise needs positive bandwidth and non-negative power");
  CheckFrequency(p.center_hz, spec, alias, "noise center");
  const double fs = spec.sample_rate_hz;
  const double sigma = std::sqrt(0.5 * p.power);
  const int n = static_cast<int>(out.size());
  if (p.bandwidth_hz >= fs) {
    for (auto& s : out) {
      const double re = rng.Normal();
      s = {sigma * re, sigma * rng.Normal()};
    }
  } else {
    constexpr int kTaps = 129;
    const auto taps = LowPassTaps(0.5 * p.bandwidth_hz / fs, kTaps);
    std::vector<Complex> white(n + kTaps - 1);
    for (auto& s : white) {
      const double re = rng.Normal();
      s = {sigma * re, sigma * rng.Normal()};
    }
    for (int k = 0; k < n; ++k) {
      Complex acc = 0.0;
      for (int t = 0; t < kTaps; ++t) acc += taps[t] * white[k + kTaps - 1 - t];
      out[k] = acc;
    }
  }
  if (p.center_hz != 0.0) {
    for (int k = 0; k < n; ++k) out[k] *= Cis(kTwoPi * p.center_hz * k / fs);
  }
}

void SynthChirp(const ChirpParams& p, const SampleSpec& spec, bool alias,
                std::vector<Complex>& out) {
  CheckFrequency(p.f_start_hz, spec, alias, "chirp start");
  CheckFrequency(p.f_stop_hz, spec, alias, "chirp stop");
  const double fs = spec.sample_rate_hz;
  const long sweep = std::lround(p.sweep_period_s * fs);
  Require(sweep >= 2, ErrorCode::kInvalidSpec, "chirp sweep shorter than 2 samples");
  // Sample j of each sweep sits at f_start + (f_stop - f_start) * j/(sweep-1),
  // so the last sample of a sweep is exactly at f_stop. The phase advance
  // into sample k uses the instantaneous frequency at k.
  double phase = 0.0;
  for (size_t k = 0; k < out.size(); ++k) {
    const double j = static_cast<double>(static_cast<long>(k) % sweep);
    const double f = p.f_start_hz + (p.f_stop_hz - p.f_start_hz) * j / (sweep - 1);
    if (k > 0) phase += kTwoPi * f / fs;
    phase = std::remainder(phase, kTwoPi);
    out[k] = p.amplitude * Cis(phase);
  }
}

void SynthMultitone(const MultitoneParams& p, const SampleSpec& spec, bool alias,
                    std::vector<Complex>& out) {
  std::fill(out.begin(), out.end(), Complex{});
  for (const auto& tone : p.tones) {
    const IqBuffer t = SynthTone(tone, spec, alias);
    for (size_t k = 0; k < out.size(); ++k) out[k] += t.samples[k];
  }
}

void SynthPulsed(const PulsedParams& p, const SampleSpec& spec, bool alias,
                 std::vector<Complex>& out) {
  Require(p.duty_cycle > 0.0 && p.duty_cycle <= 1.0, ErrorCode::kInvalidSpec,
          "duty cycle must be in (0, 1]");
  Require(p.pulse_rate_hz > 0.0, ErrorCode::kInvalidSpec, "pulse rate must be positive");
  CheckFrequency(p.carrier_hz, spec, alias, "pulse carrier");
  const double fs = spec.sample_rate_hz;
  for (size_t k = 0; k < out.size(); ++k) {
    const double cycles = static_cast<double>(k) * p.pulse_rate_hz / fs;
    const double position = cycles - std::floor(cycles);
    out[k] = position < p.duty_cycle
                 ? p.amplitude * Cis(kTwoPi * p.carrier_hz * k / fs)
                 : Complex{};
  }
}

void SynthHopper(const HopperParams& p, const SampleSpec& spec, bool alias,
                 Rng& rng, std::vector<Complex>& out) {
  Require(!p.hop_set_hz.empty(), ErrorCode::kInvalidSpec, "empty hop set");
  for (double f : p.hop_set_hz) CheckFrequency(f, spec, alias, "hop frequency");
  const double fs = spec.sample_rate_hz;
  const long dwell = std::max(1L, std::lround(p.dwell_s * fs));
  double phase = 0.0;
  double f = 0.0;
  for (size_t k = 0; k < out.size(); ++k) {
    if (static_cast<long>(k) % dwell == 0) {
      f = p.hop_set_hz[rng.UniformInt(p.hop_set_hz.size())];
    }
    out[k] = p.amplitude * Cis(phase);
    phase = std::remainder(phase + kTwoPi * f / fs, kTwoPi);
  }
}

void SynthModulated(const ModulatedParams& p, const SampleSpec& spec, bool alias,
                    Rng& rng, std::vector<Complex>& out) {
  Require(p.symbol_rate_hz > 0.0 && p.phase_alphabet >= 2, ErrorCode::kInvalidSpec,
          "modulation needs a positive symbol rate and alphabet >= 2");
  CheckFrequency(p.carrier_hz, spec, alias, "modulation carrier");
  const double fs = spec.sample_rate_hz;
  long current_symbol = -1;
  double symbol_phase = 0.0;
  for (size_t k = 0; k < out.size(); ++k) {
    const long s = static_cast<long>(std::floor(k * p.symbol_rate_hz / fs));
    if (s != current_symbol) {
      current_symbol = s;
      symbol_phase = kTwoPi * static_cast<double>(rng.UniformInt(p.phase_alphabet)) /
                     p.phase_alphabet;
    }
    out[k] = p.amplitude * Cis(kTwoPi * p.carrier_hz * k / fs + symbol_phase);
  }
}

}  // namespace

SampleSpec SampleSpec::FromCount(double sample_rate_hz, int n_samples) {
  SampleSpec s{sample_rate_hz, sample_rate_hz > 0 ? n_samples / sample_rate_hz : 0.0};
  return s;
}

int SampleSpec::n_samples() const {
  return static_cast<int>(std::llround(sample_rate_hz * duration_s));
}

void SampleSpec::Validate() const {
  Require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0,
          ErrorCode::kInvalidSpec, "sample rate must be positive");
  Require(std::isfinite(duration_s) && n_samples() >= 2, ErrorCode::kInvalidSpec,
          "sample spec needs at least 2 samples");
}

ToneSpec ToneSpec::FromPolar(double freq_hz, double amplitude, double phase) {
  return {freq_hz, amplitude * std::cos(phase), amplitude * std::sin(phase)};
}

double ToneSpec::Amplitude() const { return std::hypot(amp_i, amp_q); }
double ToneSpec::Phase() const { return std::atan2(amp_q, amp_i); }

double IqBuffer::Energy() const {
  double e = 0.0;
  for (const auto& s : samples) e += std::norm(s);
  return e;
}

const char* WaveformClassName(WaveformClass c) {
  switch (c) {
    case WaveformClass::kClean: return "clean";
    case WaveformClass::kNoise: return "noise";
    case WaveformClass::kChirp: return "chirp";
    case WaveformClass::kMultitone: return "multitone";
    case WaveformClass::kPulsed: return "pulsed";
    case WaveformClass::kFrequencyHopper: return "frequency_hopper";
    case WaveformClass::kModulated: return "modulated";
  }
  return "unknown";
}

WaveformClass ParseWaveformClass(const std::string& name) {
  std::string key;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (key == "clean") return WaveformClass::kClean;
  if (key == "noise") return WaveformClass::kNoise;
  if (key == "chirp") return WaveformClass::kChirp;
  if (key == "multitone" || key == "singletone" || key == "cw") {
    return WaveformClass::kMultitone;
  }
  if (key == "pulsed") return WaveformClass::kPulsed;
  if (key == "frequencyhopper" || key == "hopper") {
    return WaveformClass::kFrequencyHopper;
  }
  if (key == "modulated") return WaveformClass::kModulated;
  Fail(ErrorCode::kUnsupportedWaveform, "unsupported waveform class '" + name + "'");
}

IqBuffer SynthTone(const ToneSpec& tone, const SampleSpec& spec, bool allow_aliasing) {
  spec.Validate();
  if (!allow_aliasing) {
    Require(std::abs(tone.freq_hz) < spec.sample_rate_hz, ErrorCode::kInvalidSpec,
            "tone frequency at or above the sample rate");
  }
  const int n = spec.n_samples();
  const double amplitude = tone.Amplitude();
  const double phi = tone.Phase();
  IqBuffer out{std::vector<Complex>(n), spec};
  for (int k = 0; k < n; ++k) {
    const double theta = kTwoPi * tone.freq_hz * k / spec.sample_rate_hz - phi;
    out.samples[k] = {amplitude * std::cos(theta), amplitude * std::sin(theta)};
  }
  return out;
}

IqBuffer SynthWaveform(const WaveformSpec& w, const SampleSpec& spec, uint64_t seed) {
  spec.Validate();
  IqBuffer out{std::vector<Complex>(spec.n_samples()), spec};
  Rng rng(MixSeed(seed, static_cast<uint64_t>(w.label())));
  const bool alias = w.allow_aliasing;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CleanParams>) {
          SynthClean(p, rng, out.samples);
        } else if constexpr (std::is_same_v<T, NoiseParams>) {
          SynthNoise(p, spec, alias, rng, out.samples);
        } else if constexpr (std::is_same_v<T, ChirpParams>) {
          SynthChirp(p, spec, alias, out.samples);
        } else if constexpr (std::is_same_v<T, MultitoneParams>) {
          SynthMultitone(p, spec, alias, out.samples);
        } else if constexpr (std::is_same_v<T, PulsedParams>) {
          SynthPulsed(p, spec, alias, out.samples);
        } else if constexpr (std::is_same_v<T, HopperParams>) {
          SynthHopper(p, spec, alias, rng, out.samples);
        } else {
          SynthModulated(p, spec, alias, rng, out.samples);
        }
      },
      w.params);
  return out;
}

IqBuffer ApplyChannel(const IqBuffer& x, const ChannelSpec& ch, uint64_t seed) {
  const int n = static_cast<int>(x.size());
  std::vector<MultipathTap> taps = ch.multipath_taps;
  if (taps.empty()) taps.push_back({0, {1.0, 0.0}});
  for (size_t i = 0; i < taps.size(); ++i) {
    Require(taps[i].delay_samples >= 0 && taps[i].delay_samples < n,
            ErrorCode::kInvalidChannel, "tap delay must be in [0, buffer length)");
    Require(i == 0 || taps[i].delay_samples > taps[i - 1].delay_samples,
            ErrorCode::kInvalidChannel, "tap delays must be strictly increasing");
  }
  const double gain = std::pow(10.0, -ch.attenuation_db / 20.0);
  IqBuffer out{std::vector<Complex>(n), x.spec};
  for (int k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (const auto& tap : taps) {
      if (k >= tap.delay_samples) acc += tap.gain * x.samples[k - tap.delay_samples];
    }
    out.samples[k] = gain * acc;
  }
  if (std::isfinite(ch.jsr_db)) {
    Rng rng(MixSeed(seed, ch.noise_seed));
    const double sigma = std::sqrt(0.5 * std::pow(10.0, -ch.jsr_db / 10.0));
    for (auto& s : out.samples) {
      const double re = rng.Normal();
      s += Complex{sigma * re, sigma * rng.Normal()};
    }
  }
  return out;
}

double AliasFrequency(double f, double fs) {
  const double folded = std::fmod(std::abs(f), fs);
  return folded > 0.5 * fs ? fs - folded : folded;
}

}  // namespace jamcomp
