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

#include "features/features.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "common/error.h"
#include "common/parallel.h"
#include "features/fft.h"

namespace jamcomp {

using nlohmann::json;

const char* DomainName(Domain d) {
  switch (d) {
    case Domain::kSpectral: return "spectral";
    case Domain::kTemporal: return "temporal";
    case Domain::kMixed: return "mixed";
    case Domain::kIq: return "iq";
  }
  return "unknown";
}

Domain ParseDomain(const std::string& name) {
  if (name == "spectral") return Domain::kSpectral;
  if (name == "temporal") return Domain::kTemporal;
  if (name == "mixed") return Domain::kMixed;
  if (name == "iq") return Domain::kIq;
  Fail(ErrorCode::kInvalidArgument, "unknown domain '" + name + "'");
}

std::vector<double> PowerSpectrumLinear(const IqBuffer& x, int window_len, int n_bins) {
  Require(IsPowerOfTwo(window_len), ErrorCode::kInvalidLength,
          "window length must be a power of two");
  Require(n_bins > 0 && window_len % n_bins == 0, ErrorCode::kInvalidSpec,
          "bin count must divide the window length");
  const int n_windows = static_cast<int>(x.size()) / window_len;
  Require(n_windows >= 1, ErrorCode::kInsufficientSamples,
          "buffer shorter than one spectral window");
  std::vector<double> hann(window_len);
  for (int k = 0; k < window_len; ++k) {
    hann[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * k / window_len);
  }
  const int group = window_len / n_bins;
  const double norm = 1.0 / (static_cast<double>(window_len) * window_len);
  std::vector<double> power(n_bins, 0.0);
  std::vector<Complex> frame(window_len);
  for (int w = 0; w < n_windows; ++w) {
    for (int k = 0; k < window_len; ++k) {
      frame[k] = hann[k] * x.samples[static_cast<size_t>(w) * window_len + k];
    }
    const auto spectrum = Fft(frame);
    for (int m = 0; m < window_len; ++m) {
      // fftshift: shifted index 0 is -fs/2.
      const int shifted = (m + window_len / 2) % window_len;
      power[shifted / group] += std::norm(spectrum[m]) * norm;
    }
  }
  for (double& p : power) p /= n_windows;
  return power;
}

SpectralFrame PowerSpectrumBins(const IqBuffer& x, int window_len, int n_bins) {
  SpectralFrame frame;
  frame.window_len = window_len;
  frame.bins = PowerSpectrumLinear(x, window_len, n_bins);
  for (double& b : frame.bins) b = 10.0 * std::log10(b + kLogEpsilon);
  return frame;
}

Moments ComputeMoments(std::span<const double> y) {
  Moments m;
  if (y.empty()) {
    m.degenerate = true;
    return m;
  }
  const double n = static_cast<double>(y.size());
  double sum = 0.0;
  for (double v : y) sum += v;
  m.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : y) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.stddev = std::sqrt(m2);
  if (m.stddev <= 1e-12 * std::max(1.0, std::abs(m.mean))) {
    m.stddev = 0.0;
    m.skewness = 0.0;
    m.kurtosis = 3.0;
    m.degenerate = true;
    return m;
  }
  m.skewness = m3 / (m2 * m.stddev);
  m.kurtosis = m4 / (m2 * m2);
  return m;
}

double CountsEntropy(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

double HistogramEntropy(std::span<const double> y, int n_bins) {
  if (y.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  std::vector<double> counts(n_bins, 0.0);
  for (double v : y) {
    int b = 0;
    if (range > 0.0) {
      b = static_cast<int>((v - *lo) / range * n_bins);
      b = std::clamp(b, 0, n_bins - 1);
    }
    counts[b] += 1.0;
  }
  return CountsEntropy(counts);
}

TemporalFrame TemporalStats(const IqBuffer& x, int n_sub) {
  Require(n_sub >= 1 && static_cast<long>(x.size()) >= 8L * n_sub,
          ErrorCode::kInsufficientSamples, "too few samples for temporal statistics");
  const size_t len = x.size() / n_sub;
  TemporalFrame frame;
  frame.stats.reserve(static_cast<size_t>(n_sub) * kTemporalStatsPerWindow);
  std::vector<double> y(len);
  for (int w = 0; w < n_sub; ++w) {
    double energy = 0.0;
    double max_abs = 0.0;
    for (size_t k = 0; k < len; ++k) {
      y[k] = std::abs(x.samples[w * len + k]);
      energy += y[k] * y[k];
      max_abs = std::max(max_abs, y[k]);
    }
    const Moments m = ComputeMoments(y);
    if (m.degenerate) frame.degenerate_windows.push_back(w);
    frame.stats.insert(frame.stats.end(),
                       {m.mean, m.stddev, m.skewness, m.kurtosis, max_abs,
                        std::log(energy + kLogEpsilon), HistogramEntropy(y)});
  }
  return frame;
}

FeatureVector MixedVector(const SpectralFrame& s, const TemporalFrame& t) {
  FeatureVector v;
  v.domain = Domain::kMixed;
  v.values.reserve(s.bins.size() + t.stats.size());
  v.values.insert(v.values.end(), s.bins.begin(), s.bins.end());
  v.values.insert(v.values.end(), t.stats.begin(), t.stats.end());
  return v;
}

std::pair<SpectralFrame, TemporalFrame> SplitMixed(const FeatureVector& v) {
  Require(v.values.size() == static_cast<size_t>(kMixedDim), ErrorCode::kShape,
          "mixed vector must have 177 values");
  SpectralFrame s;
  s.bins.assign(v.values.begin(), v.values.begin() + kSpectralBins);
  TemporalFrame t;
  t.stats.assign(v.values.begin() + kSpectralBins, v.values.end());
  return {s, t};
}

FeatureVector IqVector(const IqBuffer& x, int n) {
  Require(static_cast<int>(x.size()) >= n, ErrorCode::kInsufficientSamples,
          "buffer shorter than the IQ segment");
  FeatureVector v;
  v.domain = Domain::kIq;
  v.values.resize(2 * static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    v.values[k] = x.samples[k].real();
    v.values[n + k] = x.samples[k].imag();
  }
  return v;
}

FeatureVector ExtractFeatures(const IqBuffer& x, Domain domain) {
  switch (domain) {
    case Domain::kSpectral:
      return {PowerSpectrumBins(x).bins, Domain::kSpectral};
    case Domain::kTemporal:
      return {TemporalStats(x).stats, Domain::kTemporal};
    case Domain::kMixed:
      return MixedVector(PowerSpectrumBins(x), TemporalStats(x));
    case Domain::kIq:
      return IqVector(x);
  }
  Fail(ErrorCode::kInvalidArgument, "unknown domain");
}

int DomainDim(Domain domain) {
  switch (domain) {
    case Domain::kSpectral: return kSpectralBins;
    case Domain::kTemporal: return kTemporalDim;
    case Domain::kMixed: return kMixedDim;
    case Domain::kIq: return 2 * kIqSegment;
  }
  return 0;
}

std::vector<std::string> DomainColumns(Domain domain) {
  std::vector<std::string> cols;
  char buf[16];
  if (domain == Domain::kSpectral || domain == Domain::kMixed) {
    for (int i = 0; i < kSpectralBins; ++i) {
      std::snprintf(buf, sizeof(buf), "s%03d", i);
      cols.emplace_back(buf);
    }
  }
  if (domain == Domain::kTemporal || domain == Domain::kMixed) {
    for (int i = 0; i < kTemporalDim; ++i) {
      std::snprintf(buf, sizeof(buf), "t%02d", i);
      cols.emplace_back(buf);
    }
  }
  if (domain == Domain::kIq) {
    for (const char prefix : {'i', 'q'}) {
      for (int i = 0; i < kIqSegment; ++i) {
        std::snprintf(buf, sizeof(buf), "%c%03d", prefix, i);
        cols.emplace_back(buf);
      }
    }
  }
  return cols;
}

json NormStats::ToJson() const {
  return json{{"min", min}, {"max", max}, {"constant_dims", constant_dims}};
}

NormStats NormStats::FromJson(const json& j) {
  NormStats s;
  try {
    s.min = j.at("min").get<std::vector<double>>();
    s.max = j.at("max").get<std::vector<double>>();
    if (j.contains("constant_dims")) s.constant_dims = j["constant_dims"].get<std::vector<int>>();
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad norm stats: ") + e.what());
  }
  Require(s.min.size() == s.max.size(), ErrorCode::kFormat, "norm stats size mismatch");
  return s;
}

NormStats FitNormStats(const Matrix& train) {
  Require(train.rows() >= 2, ErrorCode::kInvalidArgument,
          "normalization needs at least two vectors");
  NormStats s;
  s.min.assign(train.cols(), 0.0);
  s.max.assign(train.cols(), 0.0);
  for (int c = 0; c < train.cols(); ++c) {
    double lo = train(0, c), hi = train(0, c);
    for (int r = 1; r < train.rows(); ++r) {
      lo = std::min(lo, train(r, c));
      hi = std::max(hi, train(r, c));
    }
    s.min[c] = lo;
    s.max[c] = hi;
    if (!(hi > lo)) s.constant_dims.push_back(c);
  }
  return s;
}

NormalizeResult ApplyNormStats(const NormStats& stats, const Matrix& x) {
  Require(static_cast<int>(stats.min.size()) == x.cols(), ErrorCode::kShape,
          "norm stats dimension mismatch");
  NormalizeResult out{Matrix(x.rows(), x.cols()), 0, 0.0};
  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) {
      const double range = stats.max[c] - stats.min[c];
      double v = 0.5;
      if (range > 0.0) {
        v = (x(r, c) - stats.min[c]) / range;
        if (v < 0.0 || v > 1.0) {
          ++out.clipped;
          v = std::clamp(v, 0.0, 1.0);
        }
      }
      out.values(r, c) = v;
    }
  }
  if (!x.empty()) out.clip_rate = static_cast<double>(out.clipped) / static_cast<double>(x.size());
  return out;
}

FeatureSet FeatureSet::Subset(std::span<const int> rows) const {
  FeatureSet out;
  out.domain = domain;
  out.columns = columns;
  out.values = values.SelectRows(rows);
  for (int r : rows) {
    out.class_labels.push_back(class_labels[r]);
    out.detection_labels.push_back(detection_labels[r]);
    out.scenario_ids.push_back(scenario_ids[r]);
  }
  return out;
}

FeatureSet FeatureSet::WithValues(Matrix v) const {
  Require(v.rows() == values.rows(), ErrorCode::kShape, "row count mismatch");
  FeatureSet out = *this;
  out.values = std::move(v);
  return out;
}

FeatureSet ExtractFeatureSet(const std::vector<LabeledSnapshot>& snapshots, Domain domain) {
  FeatureSet set;
  set.domain = domain;
  set.columns = DomainColumns(domain);
  const int n = static_cast<int>(snapshots.size());
  set.values = Matrix(n, DomainDim(domain));
  ParallelFor(n, [&](int i) {
    const auto v = ExtractFeatures(snapshots[i].iq, domain);
    std::copy(v.values.begin(), v.values.end(), set.values.row(i).begin());
  });
  for (const auto& s : snapshots) {
    set.class_labels.push_back(static_cast<int>(s.waveform));
    set.detection_labels.push_back(static_cast<int>(s.detection));
    set.scenario_ids.push_back(s.scenario_id);
  }
  return set;
}

void WriteFeatureCsv(const std::filesystem::path& path, const FeatureSet& set) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "scenario_id";
  for (const auto& c : set.columns) out << ',' << c;
  out << ",class,detection\n";
  char buf[32];
  for (int r = 0; r < set.size(); ++r) {
    out << set.scenario_ids[r];
    for (double v : set.values.row(r)) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out << buf;
    }
    out << ',' << WaveformClassName(static_cast<WaveformClass>(set.class_labels[r]))
        << ',' << DetectionLabelName(static_cast<DetectionLabel>(set.detection_labels[r]))
        << '\n';
  }
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

FeatureSet ReadFeatureCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kFormat, "empty feature csv");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  Require(header.size() >= 4 && header.front() == "scenario_id" &&
              header[header.size() - 2] == "class" && header.back() == "detection",
          ErrorCode::kFormat, "feature csv header must be scenario_id,...,class,detection");
  FeatureSet set;
  set.columns.assign(header.begin() + 1, header.end() - 2);
  bool has_s = false, has_t = false, has_iq = false;
  for (const auto& c : set.columns) {
    has_s |= c[0] == 's';
    has_t |= c[0] == 't';
    has_iq |= c[0] == 'i' || c[0] == 'q';
  }
  set.domain = has_iq ? Domain::kIq
               : has_s && has_t ? Domain::kMixed
               : has_s ? Domain::kSpectral
                       : Domain::kTemporal;
  const int dim = static_cast<int>(set.columns.size());
  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    Require(static_cast<int>(cells.size()) == dim + 3, ErrorCode::kFormat,
            "feature csv row " + std::to_string(rows + 1) + " has wrong column count");
    try {
      set.scenario_ids.push_back(std::stoi(cells[0]));
      for (int c = 0; c < dim; ++c) values.push_back(std::stod(cells[c + 1]));
    } catch (const std::exception&) {
      Fail(ErrorCode::kFormat, "non-numeric value in feature csv row " + std::to_string(rows + 1));
    }
    set.class_labels.push_back(static_cast<int>(ParseWaveformClass(cells[dim + 1])));
    set.detection_labels.push_back(cells[dim + 2] == "clean"
                                       ? static_cast<int>(DetectionLabel::kClean)
                                       : static_cast<int>(DetectionLabel::kInterference));
    ++rows;
  }
  set.values = Matrix(rows, dim, std::move(values));
  return set;
}

}  // namespace jamcomp
