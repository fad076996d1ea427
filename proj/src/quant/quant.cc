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

#include "quant/quant.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "common/binary_io.h"
#include "common/error.h"

namespace jamcomp {

using nlohmann::json;

namespace {

constexpr char kQuantMagic[5] = "AEQ1";

std::string StageName(size_t i, const char* what) {
  return "stage" + std::to_string(i) + "." + what;
}

int ClampQ(int64_t v) {
  return static_cast<int>(std::clamp<int64_t>(v, kQMin, kQMax));
}

double RoundScale(double s) {
  // Scales are stored as f32; keep the in-memory value identical.
  return static_cast<double>(static_cast<float>(std::max(s, kMinScale)));
}

// Calls fn(weight_index, input_index) for every tap feeding output element o.
template <typename Fn>
void ForEachTap(const LayerSpec& s, int o, Fn&& fn) {
  if (s.kind == LayerKind::kDense) {
    const size_t base = static_cast<size_t>(o) * s.in;
    for (int i = 0; i < s.in; ++i) fn(base + i, i);
    return;
  }
  const int out_len = s.out_len();
  const int oc = o / out_len;
  const int t = o % out_len;
  const int start = t * s.stride - (s.kernel - 1) / 2;
  for (int ic = 0; ic < s.in_ch; ++ic) {
    const size_t wbase = (static_cast<size_t>(oc) * s.in_ch + ic) * s.kernel;
    for (int k = 0; k < s.kernel; ++k) {
      const int pos = start + k;
      if (pos >= 0 && pos < s.in_len) fn(wbase + k, ic * s.in_len + pos);
    }
  }
}

int BiasIndex(const LayerSpec& s, int o) {
  return s.kind == LayerKind::kDense ? o : o / s.out_len();
}

double ApplyActivation(Activation a, double v) {
  switch (a) {
    case Activation::kReLU:
      return v > 0.0 ? v : 0.0;
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-v));
    case Activation::kLeakyReLU:
      return v > 0.0 ? v : 0.2 * v;
    case Activation::kLinear:
      break;
  }
  return v;
}

struct StagePass {
  Matrix pre;
  Matrix post;
};

std::vector<StagePass> RunStages(const AeModel& model, const Matrix& x) {
  Require(x.cols() == model.input_dim(), ErrorCode::kShape, "input width does not match model");
  std::vector<StagePass> passes;
  const Matrix* cur = &x;
  for (const auto& st : model.InferenceStages()) {
    const int out_dim = st.spec.out_dim();
    StagePass p{Matrix(x.rows(), out_dim), Matrix(x.rows(), out_dim)};
    for (int b = 0; b < x.rows(); ++b) {
      const auto in = cur->row(b);
      for (int o = 0; o < out_dim; ++o) {
        double acc = st.bias->value[BiasIndex(st.spec, o)];
        ForEachTap(st.spec, o, [&](size_t w, int i) { acc += st.weight->value[w] * in[i]; });
        p.pre(b, o) = acc;
        p.post(b, o) = ApplyActivation(st.spec.activation, acc);
      }
    }
    passes.push_back(std::move(p));
    cur = &passes.back().post;
  }
  return passes;
}

TensorRange RangeOf(std::span<const double> v, const CalibrationConfig& c) {
  Require(!v.empty(), ErrorCode::kInvalidArgument, "cannot calibrate an empty tensor");
  if (c.mode == CalibrationMode::kPercentile) {
    std::vector<double> copy(v.begin(), v.end());
    return {Percentile(copy, 100.0 - c.percentile), Percentile(copy, c.percentile)};
  }
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

void WriteParams(std::ostream& out, const QuantParams& p) {
  WritePod<float>(out, static_cast<float>(p.scale));
  WritePod<int8_t>(out, static_cast<int8_t>(p.zero_point));
}

QuantParams ReadParams(std::istream& in) {
  QuantParams p;
  p.scale = ReadPod<float>(in);
  p.zero_point = ReadPod<int8_t>(in);
  p.Validate();
  return p;
}

template <typename T>
void WriteBlob(std::ostream& out, const std::vector<T>& v) {
  WritePod<uint32_t>(out, static_cast<uint32_t>(v.size()));
  for (T x : v) WritePod<T>(out, x);
}

template <typename T>
std::vector<T> ReadBlob(std::istream& in, size_t expected) {
  const uint32_t n = ReadPod<uint32_t>(in);
  Require(n == expected, ErrorCode::kFormat, "tensor blob size mismatch");
  std::vector<T> v(n);
  for (T& x : v) x = ReadPod<T>(in);
  return v;
}

}  // namespace

void QuantParams::Validate() const {
  Require(std::isfinite(scale) && scale > 0.0, ErrorCode::kInvalidArgument,
          "quantization scale must be positive");
  Require(zero_point >= kQMin && zero_point <= kQMax, ErrorCode::kInvalidArgument,
          "zero point outside int8 range");
}

QuantParams QuantParams::Asymmetric(double lo, double hi) {
  Require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, ErrorCode::kInvalidArgument,
          "invalid calibration range");
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  QuantParams p;
  p.scale = RoundScale((hi - lo) / (kQMax - kQMin));
  p.zero_point = ClampQ(RoundHalfAway(kQMin - lo / p.scale));
  return p;
}

QuantParams QuantParams::Symmetric(double max_abs) {
  Require(std::isfinite(max_abs) && max_abs >= 0.0, ErrorCode::kInvalidArgument,
          "invalid weight range");
  QuantParams p;
  p.scale = RoundScale(max_abs / kQMax);
  return p;
}

int64_t RoundHalfAway(double v) {
  return static_cast<int64_t>(v < 0.0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5));
}

int8_t QuantizeValue(double x, const QuantParams& p) {
  const double r = x / p.scale;
  if (!(std::fabs(r) < 1e15)) return static_cast<int8_t>(r > 0 ? kQMax : kQMin);
  return static_cast<int8_t>(ClampQ(RoundHalfAway(r) + p.zero_point));
}

double DequantizeValue(int8_t q, const QuantParams& p) {
  return (static_cast<int>(q) - p.zero_point) * p.scale;
}

std::vector<int8_t> QuantizeTensor(std::span<const double> x, const QuantParams& p) {
  p.Validate();
  std::vector<int8_t> q(x.size());
  for (size_t i = 0; i < x.size(); ++i) q[i] = QuantizeValue(x[i], p);
  return q;
}

std::vector<double> Dequantize(std::span<const int8_t> q, const QuantParams& p) {
  std::vector<double> x(q.size());
  for (size_t i = 0; i < q.size(); ++i) x[i] = DequantizeValue(q[i], p);
  return x;
}

FixedMultiplier FixedMultiplier::FromReal(double m) {
  Require(std::isfinite(m) && m > 0.0, ErrorCode::kInvalidArgument,
          "requantization multiplier must be positive");
  int e = 0;
  const double f = std::frexp(m, &e);
  int64_t q = RoundHalfAway(f * 2147483648.0);
  if (q == (int64_t{1} << 31)) {
    q /= 2;
    ++e;
  }
  return {static_cast<int32_t>(q), -e};
}

double FixedMultiplier::ToReal() const {
  return std::ldexp(static_cast<double>(multiplier), -(31 + shift));
}

int64_t ApplyMultiplier(int32_t acc, const FixedMultiplier& m) {
  const int64_t prod = static_cast<int64_t>(acc) * m.multiplier;
  const uint64_t mag = prod < 0 ? static_cast<uint64_t>(-prod) : static_cast<uint64_t>(prod);
  const int total = 31 + m.shift;
  uint64_t r;
  if (total >= 64) {
    r = 0;
  } else if (total > 0) {
    r = (mag + (uint64_t{1} << (total - 1))) >> total;
  } else {
    // Multipliers >= 2^31 only arise from degenerate scales; saturate.
    r = -total >= 32 ? (mag ? uint64_t{1} << 40 : 0) : std::min(mag << -total, uint64_t{1} << 40);
  }
  const int64_t sr = static_cast<int64_t>(r);
  return prod < 0 ? -sr : sr;
}

json CalibrationConfig::ToJson() const {
  return json{{"mode", mode == CalibrationMode::kMinMax ? "minmax" : "percentile"},
              {"percentile", percentile},
              {"max_vectors", max_vectors}};
}

CalibrationConfig CalibrationConfig::FromJson(const json& j) {
  CalibrationConfig c;
  const std::string mode = j.value("mode", std::string("percentile"));
  Require(mode == "minmax" || mode == "percentile", ErrorCode::kInvalidSpec,
          "calibration mode must be minmax or percentile");
  c.mode = mode == "minmax" ? CalibrationMode::kMinMax : CalibrationMode::kPercentile;
  c.percentile = j.value("percentile", c.percentile);
  c.max_vectors = j.value("max_vectors", c.max_vectors);
  Require(c.percentile > 50.0 && c.percentile <= 100.0, ErrorCode::kInvalidSpec,
          "percentile must be in (50, 100]");
  Require(c.max_vectors >= 16, ErrorCode::kInvalidSpec, "need at least 16 calibration vectors");
  return c;
}

const TensorRange& CalibrationStats::at(const std::string& name) const {
  const auto it = ranges.find(name);
  if (it == ranges.end()) Fail(ErrorCode::kMissingStats, "no calibration stats for tensor " + name);
  return it->second;
}

double Percentile(std::vector<double> values, double p) {
  Require(!values.empty(), ErrorCode::kInvalidArgument, "percentile of empty set");
  Require(p >= 0.0 && p <= 100.0, ErrorCode::kInvalidArgument, "percentile out of range");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<Matrix> StageActivations(const AeModel& model, const Matrix& x) {
  std::vector<Matrix> out;
  for (auto& p : RunStages(model, x)) out.push_back(std::move(p.post));
  return out;
}

CalibrationStats Calibrate(const AeModel& model, const Matrix& calib,
                           const CalibrationConfig& config) {
  Require(calib.rows() > 0, ErrorCode::kInvalidArgument, "calibration set is empty");
  Require(calib.rows() >= 16, ErrorCode::kInvalidArgument, "need at least 16 calibration vectors");
  Matrix used = calib;
  if (calib.rows() > config.max_vectors) {
    std::vector<int> idx(config.max_vectors);
    for (int i = 0; i < config.max_vectors; ++i) idx[i] = i;
    used = calib.SelectRows(idx);
  }
  CalibrationStats stats;
  stats.n_vectors = used.rows();
  stats.ranges["input"] = RangeOf(used.data(), config);
  const auto stages = model.InferenceStages();
  const auto passes = RunStages(model, used);
  CalibrationConfig minmax = config;
  minmax.mode = CalibrationMode::kMinMax;
  for (size_t i = 0; i < stages.size(); ++i) {
    stats.ranges[StageName(i, "weight")] = RangeOf(stages[i].weight->value, minmax);
    stats.ranges[StageName(i, "out")] = RangeOf(passes[i].post.data(), config);
    if (stages[i].spec.activation == Activation::kSigmoid) {
      stats.ranges[StageName(i, "pre")] = RangeOf(passes[i].pre.data(), config);
    }
  }
  return stats;
}

int QuantizedModel::input_dim() const {
  return layers.empty() ? 0 : layers.front().spec.in_dim();
}

int QuantizedModel::output_dim() const {
  return layers.empty() ? 0 : layers.back().spec.out_dim();
}

long QuantizedModel::NumParams() const {
  long n = 0;
  for (const auto& l : layers) n += static_cast<long>(l.weight.size() + l.bias.size());
  return n;
}

long QuantizedModel::MemoryBytes() const {
  constexpr long kParamsBytes = 5;      // f32 scale + i8 zero point
  constexpr long kMultiplierBytes = 8;  // i32 multiplier + i32 shift
  long n = kParamsBytes;
  for (const auto& l : layers) {
    n += static_cast<long>(l.weight.size()) + 4 * static_cast<long>(l.bias.size());
    n += 3 * kParamsBytes + kMultiplierBytes + static_cast<long>(l.lut.size());
  }
  return n;
}

QuantizedModel QuantizeModel(const AeModel& model, const CalibrationStats& stats) {
  QuantizedModel qm;
  qm.arch = model.Descriptor();
  qm.metadata = model.metadata;
  const TensorRange& in = stats.at("input");
  qm.input_params = QuantParams::Asymmetric(in.min, in.max);
  QuantParams prev = qm.input_params;
  const auto stages = model.InferenceStages();
  for (size_t i = 0; i < stages.size(); ++i) {
    const auto& st = stages[i];
    Require(st.spec.activation != Activation::kLeakyReLU, ErrorCode::kInvalidSpec,
            "leaky ReLU stages are not supported by the int8 path");
    QuantLayer l;
    l.spec = st.spec;
    l.input_params = prev;
    const TensorRange& w = stats.at(StageName(i, "weight"));
    l.weight_params = QuantParams::Symmetric(std::max(std::fabs(w.min), std::fabs(w.max)));
    l.weight = QuantizeTensor(st.weight->value, l.weight_params);
    const double bias_scale = l.weight_params.scale * l.input_params.scale;
    l.bias.resize(st.bias->value.size());
    for (size_t b = 0; b < l.bias.size(); ++b) {
      const double r = st.bias->value[b] / bias_scale;
      l.bias[b] = static_cast<int32_t>(std::clamp<double>(
          static_cast<double>(RoundHalfAway(std::clamp(r, -3e9, 3e9))),
          std::numeric_limits<int32_t>::min(), std::numeric_limits<int32_t>::max()));
    }
    const TensorRange& out = stats.at(StageName(i, "out"));
    l.output_params = QuantParams::Asymmetric(out.min, out.max);
    if (st.spec.activation == Activation::kSigmoid) {
      const TensorRange& pre = stats.at(StageName(i, "pre"));
      l.acc_params = QuantParams::Asymmetric(pre.min, pre.max);
      l.lut.resize(256);
      for (int q = kQMin; q <= kQMax; ++q) {
        const double v = DequantizeValue(static_cast<int8_t>(q), l.acc_params);
        l.lut[q - kQMin] = QuantizeValue(1.0 / (1.0 + std::exp(-v)), l.output_params);
      }
    } else {
      l.acc_params = l.output_params;
    }
    l.requant = FixedMultiplier::FromReal(bias_scale / l.acc_params.scale);
    prev = l.output_params;
    qm.layers.push_back(std::move(l));
  }
  return qm;
}

std::vector<int8_t> Int8ForwardQuantized(const QuantizedModel& qm, std::span<const int8_t> x,
                                         long* overflow_count,
                                         std::vector<std::vector<int8_t>>* stage_q) {
  Require(static_cast<int>(x.size()) == qm.input_dim(), ErrorCode::kShape,
          "input width does not match quantized model");
  std::vector<int8_t> cur(x.begin(), x.end());
  long overflows = 0;
  for (const auto& l : qm.layers) {
    const int out_dim = l.spec.out_dim();
    std::vector<int8_t> next(out_dim);
    const int32_t zp_in = l.input_params.zero_point;
    for (int o = 0; o < out_dim; ++o) {
      int32_t acc = l.bias[BiasIndex(l.spec, o)];
      ForEachTap(l.spec, o, [&](size_t w, int i) {
        const int64_t sum = static_cast<int64_t>(acc) +
                            static_cast<int32_t>(l.weight[w]) * (static_cast<int32_t>(cur[i]) - zp_in);
        if (sum > std::numeric_limits<int32_t>::max()) {
          acc = std::numeric_limits<int32_t>::max();
          ++overflows;
        } else if (sum < std::numeric_limits<int32_t>::min()) {
          acc = std::numeric_limits<int32_t>::min();
          ++overflows;
        } else {
          acc = static_cast<int32_t>(sum);
        }
      });
      int q = ClampQ(l.acc_params.zero_point + ApplyMultiplier(acc, l.requant));
      switch (l.spec.activation) {
        case Activation::kReLU:
          q = std::max(q, l.output_params.zero_point);
          break;
        case Activation::kSigmoid:
          q = l.lut[q - kQMin];
          break;
        default:
          break;
      }
      next[o] = static_cast<int8_t>(q);
    }
    if (stage_q) stage_q->push_back(next);
    cur = std::move(next);
  }
  if (overflow_count) *overflow_count += overflows;
  return cur;
}

Int8Output Int8Forward(const QuantizedModel& qm, const Matrix& x, bool keep_stages) {
  Require(x.cols() == qm.input_dim(), ErrorCode::kShape,
          "input width does not match quantized model");
  Require(!qm.layers.empty(), ErrorCode::kInvalidArgument, "quantized model has no layers");
  Int8Output out;
  out.reconstruction = Matrix(x.rows(), qm.output_dim());
  if (keep_stages) {
    for (const auto& l : qm.layers) out.stage_outputs.emplace_back(x.rows(), l.spec.out_dim());
  }
  const QuantParams& final_params = qm.layers.back().output_params;
  for (int b = 0; b < x.rows(); ++b) {
    const auto q_in = QuantizeTensor(x.row(b), qm.input_params);
    std::vector<std::vector<int8_t>> stages;
    const auto y = Int8ForwardQuantized(qm, q_in, &out.overflow_count,
                                        keep_stages ? &stages : nullptr);
    for (size_t j = 0; j < y.size(); ++j) {
      out.reconstruction(b, static_cast<int>(j)) = DequantizeValue(y[j], final_params);
    }
    for (size_t s = 0; s < stages.size(); ++s) {
      for (size_t j = 0; j < stages[s].size(); ++j) {
        out.stage_outputs[s](b, static_cast<int>(j)) =
            DequantizeValue(stages[s][j], qm.layers[s].output_params);
      }
    }
  }
  return out;
}

json QuantReport::ToJson() const {
  return json{{"mse_float", mse_float},   {"mse_int8", mse_int8},
              {"snr_db", snr_db},         {"per_layer_mse", per_layer_mse},
              {"float_bytes", float_bytes}, {"int8_bytes", int8_bytes},
              {"overflow_count", overflow_count}};
}

QuantReport MakeQuantReport(const AeModel& model, const QuantizedModel& qm, const Matrix& eval) {
  Require(eval.rows() > 0, ErrorCode::kInvalidArgument, "evaluation set is empty");
  QuantReport r;
  const auto float_stages = StageActivations(model, eval);
  const auto q = Int8Forward(qm, eval, true);
  const Matrix& f = float_stages.back();
  double se_f = 0.0, se_q = 0.0, sig = 0.0, noise = 0.0;
  for (size_t i = 0; i < eval.size(); ++i) {
    const double x = eval.data()[i], yf = f.data()[i], yq = q.reconstruction.data()[i];
    se_f += (yf - x) * (yf - x);
    se_q += (yq - x) * (yq - x);
    sig += yf * yf;
    noise += (yf - yq) * (yf - yq);
  }
  r.mse_float = se_f / static_cast<double>(eval.size());
  r.mse_int8 = se_q / static_cast<double>(eval.size());
  // Capped so an exact match still serializes as a finite number.
  r.snr_db = noise > 0.0 ? 10.0 * std::log10(std::max(sig, 1e-300) / noise) : 300.0;
  for (size_t s = 0; s < float_stages.size(); ++s) {
    double se = 0.0;
    for (size_t i = 0; i < float_stages[s].size(); ++i) {
      const double d = float_stages[s].data()[i] - q.stage_outputs[s].data()[i];
      se += d * d;
    }
    r.per_layer_mse.push_back(se / static_cast<double>(float_stages[s].size()));
  }
  r.float_bytes = 4 * model.NumParams();
  r.int8_bytes = qm.MemoryBytes();
  r.overflow_count = q.overflow_count;
  return r;
}

void SaveQuantizedModel(const std::filesystem::path& path, const QuantizedModel& qm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  WriteMagic(out, kQuantMagic);
  WritePod<uint32_t>(out, kQuantFormatVersion);
  json layers = json::array();
  for (const auto& l : qm.layers) layers.push_back(l.spec.ToJson());
  WriteString(out, json{{"arch", qm.arch}, {"metadata", qm.metadata}, {"layers", layers}}.dump());
  WriteParams(out, qm.input_params);
  for (const auto& l : qm.layers) {
    WriteParams(out, l.weight_params);
    WriteBlob(out, l.weight);
    WriteBlob(out, l.bias);
    WriteParams(out, l.input_params);
    WriteParams(out, l.acc_params);
    WriteParams(out, l.output_params);
    WritePod<int32_t>(out, l.requant.multiplier);
    WritePod<int32_t>(out, l.requant.shift);
    WriteBlob(out, l.lut);
  }
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

QuantizedModel LoadQuantizedModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  ExpectMagic(in, kQuantMagic);
  const uint32_t version = ReadPod<uint32_t>(in);
  Require(version == kQuantFormatVersion, ErrorCode::kFormat,
          "unsupported quantized model format version " + std::to_string(version));
  QuantizedModel qm;
  json header;
  try {
    header = json::parse(ReadString(in));
    qm.arch = header.at("arch");
    qm.metadata = header.value("metadata", json::object());
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad quantized model header: ") + e.what());
  }
  qm.input_params = ReadParams(in);
  for (const auto& spec_json : header.at("layers")) {
    QuantLayer l;
    l.spec = LayerSpec::FromJson(spec_json);
    l.weight_params = ReadParams(in);
    const size_t n_bias = l.spec.kind == LayerKind::kDense ? l.spec.out : l.spec.out_ch;
    l.weight = ReadBlob<int8_t>(in, static_cast<size_t>(l.spec.NumParams()) - n_bias);
    l.bias = ReadBlob<int32_t>(in, n_bias);
    l.input_params = ReadParams(in);
    l.acc_params = ReadParams(in);
    l.output_params = ReadParams(in);
    l.requant.multiplier = ReadPod<int32_t>(in);
    l.requant.shift = ReadPod<int32_t>(in);
    l.lut = ReadBlob<int8_t>(in, l.spec.activation == Activation::kSigmoid ? 256 : 0);
    qm.layers.push_back(std::move(l));
  }
  return qm;
}

}  // namespace jamcomp
