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

// Spectral (128 log-power bins), temporal (7 sub-windows x 7 statistics) and
// mixed (177-value) feature domains, plus min-max normalization and the
// feature CSV format.

#ifndef JAMCOMP_FEATURES_FEATURES_H_
#define JAMCOMP_FEATURES_FEATURES_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "common/matrix.h"
#include "json.hpp"
#include "synth/dataset.h"
#include "synth/signal_synth.h"

namespace jamcomp {

enum class Domain { kSpectral, kTemporal, kMixed, kIq };

const char* DomainName(Domain d);
Domain ParseDomain(const std::string& name);

inline constexpr int kSpectralBins = 128;
inline constexpr int kSpectralWindow = 1024;
inline constexpr int kTemporalSubWindows = 7;
inline constexpr int kTemporalStatsPerWindow = 7;
inline constexpr int kTemporalDim = kTemporalSubWindows * kTemporalStatsPerWindow;
inline constexpr int kMixedDim = kSpectralBins + kTemporalDim;
inline constexpr int kIqSegment = 128;  // complex samples in an IQ-domain vector
inline constexpr double kLogEpsilon = 1e-12;

struct SpectralFrame {
  std::vector<double> bins;  // dB, ordered from -fs/2 to +fs/2
  int window_len = kSpectralWindow;
};

struct TemporalFrame {
  std::vector<double> stats;  // sub-window major
  // Sub-windows whose magnitude had zero variance (skewness/kurtosis set to
  // 0 and 3).
  std::vector<int> degenerate_windows;
};

struct FeatureVector {
  std::vector<double> values;
  Domain domain = Domain::kMixed;
};

// Linear power per bin group, fftshifted. Each group holds the sum of
// |X[m]|^2 / window_len^2 over its FFT bins, so the groups sum to the mean
// windowed power of the frame. Averaged over all full windows.
std::vector<double> PowerSpectrumLinear(const IqBuffer& x, int window_len = kSpectralWindow,
                                        int n_bins = kSpectralBins);
// 10*log10(linear + 1e-12) of the above.
SpectralFrame PowerSpectrumBins(const IqBuffer& x, int window_len = kSpectralWindow,
                                int n_bins = kSpectralBins);

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;  // population
  double skewness = 0.0;
  double kurtosis = 3.0;  // Pearson
  bool degenerate = false;
};

Moments ComputeMoments(std::span<const double> y);
// Shannon entropy (nats) of an n_bins histogram of y min-max scaled to [0, 1].
double HistogramEntropy(std::span<const double> y, int n_bins = 16);
// Entropy of an explicit histogram of counts.
double CountsEntropy(std::span<const double> counts);

// Statistics of |x| over n_sub equal sub-windows (tail truncated): mean,
// std, skewness, kurtosis, max-abs, log-energy, entropy.
TemporalFrame TemporalStats(const IqBuffer& x, int n_sub = kTemporalSubWindows);

FeatureVector MixedVector(const SpectralFrame& s, const TemporalFrame& t);
std::pair<SpectralFrame, TemporalFrame> SplitMixed(const FeatureVector& v);

// First kIqSegment samples, I block followed by Q block (2 channels).
FeatureVector IqVector(const IqBuffer& x, int n = kIqSegment);

FeatureVector ExtractFeatures(const IqBuffer& x, Domain domain);
int DomainDim(Domain domain);
std::vector<std::string> DomainColumns(Domain domain);

struct NormStats {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<int> constant_dims;  // mapped to 0.5

  nlohmann::json ToJson() const;
  static NormStats FromJson(const nlohmann::json& j);
};

struct NormalizeResult {
  Matrix values;
  long clipped = 0;
  double clip_rate = 0.0;
};

// Needs at least two rows.
NormStats FitNormStats(const Matrix& train);
NormalizeResult ApplyNormStats(const NormStats& stats, const Matrix& x);

// A table of feature rows with their labels.
struct FeatureSet {
  Domain domain = Domain::kMixed;
  std::vector<std::string> columns;
  Matrix values;
  std::vector<int> class_labels;      // WaveformClass as int
  std::vector<int> detection_labels;  // DetectionLabel as int
  std::vector<int> scenario_ids;

  int size() const { return values.rows(); }
  FeatureSet Subset(std::span<const int> rows) const;
  // Replace values keeping labels (e.g. AE reconstructions).
  FeatureSet WithValues(Matrix v) const;
};

FeatureSet ExtractFeatureSet(const std::vector<LabeledSnapshot>& snapshots, Domain domain);

// CSV: scenario_id, one column per dimension (s000..s127, t00..t48 or
// i000../q000..), then class and detection.
void WriteFeatureCsv(const std::filesystem::path& path, const FeatureSet& set);
FeatureSet ReadFeatureCsv(const std::filesystem::path& path);

}  // namespace jamcomp

#endif  // JAMCOMP_FEATURES_FEATURES_H_
