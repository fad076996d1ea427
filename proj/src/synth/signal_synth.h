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

// Complex-baseband synthesis of GNSS-band interference: analytic tones,
// six jammer families plus a clean noise floor, a multipath/attenuation/AWGN
// channel, and the alias-folding rule for sampled real tones.

#ifndef JAMCOMP_SYNTH_SIGNAL_SYNTH_H_
#define JAMCOMP_SYNTH_SIGNAL_SYNTH_H_

#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace jamcomp {

using Complex = std::complex<double>;

struct SampleSpec {
  double sample_rate_hz = 0.0;
  double duration_s = 0.0;

  static SampleSpec FromCount(double sample_rate_hz, int n_samples);
  // round(sample_rate_hz * duration_s)
  int n_samples() const;
  // Throws invalid-spec unless sample_rate_hz > 0 and n_samples() >= 2.
  void Validate() const;
};

struct ToneSpec {
  double freq_hz = 0.0;
  double amp_i = 0.0;  // cosine (in-phase) amplitude
  double amp_q = 0.0;  // sine (quadrature) amplitude

  static ToneSpec FromPolar(double freq_hz, double amplitude, double phase);
  double Amplitude() const;
  double Phase() const;  // atan2(amp_q, amp_i)
};

struct IqBuffer {
  std::vector<Complex> samples;
  SampleSpec spec;

  size_t size() const { return samples.size(); }
  double Energy() const;  // sum |x|^2
};

enum class WaveformClass {
  kClean = 0,
  kNoise,
  kChirp,
  kMultitone,
  kPulsed,
  kFrequencyHopper,
  kModulated,
};

inline constexpr int kNumWaveformClasses = 7;

const char* WaveformClassName(WaveformClass c);
// Accepts the names produced by WaveformClassName (case-insensitive, with or
// without separators). Throws unsupported-waveform otherwise.
WaveformClass ParseWaveformClass(const std::string& name);

struct CleanParams {
  double noise_power = 1.0;
};
struct NoiseParams {
  double bandwidth_hz = 0.0;  // >= sample rate means white
  double center_hz = 0.0;
  double power = 1.0;
};
struct ChirpParams {
  double f_start_hz = 0.0;
  double f_stop_hz = 0.0;
  double sweep_period_s = 0.0;
  double amplitude = 1.0;
};
struct MultitoneParams {
  std::vector<ToneSpec> tones;
};
struct PulsedParams {
  double duty_cycle = 0.5;  // (0, 1]
  double pulse_rate_hz = 0.0;
  double carrier_hz = 0.0;
  double amplitude = 1.0;
};
struct HopperParams {
  std::vector<double> hop_set_hz;
  double dwell_s = 0.0;  // snapped to whole samples
  double amplitude = 1.0;
};
struct ModulatedParams {
  double symbol_rate_hz = 0.0;
  int phase_alphabet = 2;  // M-PSK order
  double carrier_hz = 0.0;
  double amplitude = 1.0;
};

using WaveformParams =
    std::variant<CleanParams, NoiseParams, ChirpParams, MultitoneParams,
                 PulsedParams, HopperParams, ModulatedParams>;

struct WaveformSpec {
  WaveformParams params;
  // When false, every configured frequency must be strictly below fs/2.
  bool allow_aliasing = false;

  WaveformClass label() const {
    return static_cast<WaveformClass>(params.index());
  }
};

struct MultipathTap {
  int delay_samples = 0;
  Complex gain{1.0, 0.0};
};

struct ChannelSpec {
  double attenuation_db = 0.0;
  // Jammer-to-noise ratio for a unit-power input. Noise power is
  // 10^(-jsr_db/10); +infinity disables the noise.
  double jsr_db = std::numeric_limits<double>::infinity();
  std::vector<MultipathTap> multipath_taps;  // empty: single unit tap
  uint64_t noise_seed = 0;
};

// Sample k is A*exp(i*(2*pi*f*k/fs - phi)); the in-phase channel is
// amp_i*cos(theta) + amp_q*sin(theta).
IqBuffer SynthTone(const ToneSpec& tone, const SampleSpec& spec,
                   bool allow_aliasing = false);

IqBuffer SynthWaveform(const WaveformSpec& w, const SampleSpec& spec,
                       uint64_t seed);

IqBuffer ApplyChannel(const IqBuffer& x, const ChannelSpec& ch, uint64_t seed);

// Frequency in [0, fs/2] that a real tone at f aliases to when sampled at fs.
double AliasFrequency(double f, double fs);

}  // namespace jamcomp

#endif  // JAMCOMP_SYNTH_SIGNAL_SYNTH_H_
