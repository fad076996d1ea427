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

#ifndef JAMCOMP_QUANT_QUANT_H_
#define JAMCOMP_QUANT_QUANT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "common/matrix.h"
#include "json.hpp"
#include "nn/ae_model.h"

namespace jamcomp {

inline constexpr int kQMin = -128;
inline constexpr int kQMax = 127;
// Smallest scale handed out, so a constant tensor still gets a usable grid.
inline constexpr double kMinScale = 1e-8;
inline constexpr uint32_t kQuantFormatVersion = 1;

struct QuantParams {
  double scale = 1.0;
  int zero_point = 0;

  void Validate() const;
  // Asymmetric params covering [lo, hi] widened to include zero.
  static QuantParams Asymmetric(double lo, double hi);
  // Symmetric params (zero_point 0) covering [-max_abs, max_abs].
  static QuantParams Symmetric(double max_abs);
};

// Rounds half away from zero.
int64_t RoundHalfAway(double v);

int8_t QuantizeValue(double x, const QuantParams& p);
double DequantizeValue(int8_t q, const QuantParams& p);
std::vector<int8_t> QuantizeTensor(std::span<const double> x, const QuantParams& p);
std::vector<double> Dequantize(std::span<const int8_t> q, const QuantParams& p);

// Fixed-point representation of a positive real multiplier:
// m ~= multiplier * 2^-(31 + shift), multiplier in [2^30, 2^31).
struct FixedMultiplier {
  int32_t multiplier = 0;
  int shift = 0;

  static FixedMultiplier FromReal(double m);
  double ToReal() const;
};

// Applies a fixed multiplier to an int32 accumulator with round-half-away.
int64_t ApplyMultiplier(int32_t acc, const FixedMultiplier& m);

struct TensorRange {
  double min = 0.0;
  double max = 0.0;
};

enum class CalibrationMode { kMinMax, kPercentile };

struct CalibrationConfig {
  CalibrationMode mode = CalibrationMode::kPercentile;
  double percentile = 99.9;
  int max_vectors = 256;

  nlohmann::json ToJson() const;
  static CalibrationConfig FromJson(const nlohmann::json& j);
};

// Ranges keyed by tensor name: "input", "stage<i>.weight", "stage<i>.out"
// and, for sigmoid stages, "stage<i>.pre".
struct CalibrationStats {
  std::map<std::string, TensorRange> ranges;
  int n_vectors = 0;

  const TensorRange& at(const std::string& name) const;
};

// Linear-interpolated percentile (p in [0, 100]) of the values.
double Percentile(std::vector<double> values, double p);

// Float stage-by-stage execution of the deterministic inference path.
// Returns the post-activation output of every stage.
std::vector<Matrix> StageActivations(const AeModel& model, const Matrix& x);

CalibrationStats Calibrate(const AeModel& model, const Matrix& calib,
                           const CalibrationConfig& config = {});

struct QuantLayer {
  LayerSpec spec;
  std::vector<int8_t> weight;
  QuantParams weight_params;
  std::vector<int32_t> bias;  // scale = weight scale * input scale
  QuantParams input_params;
  QuantParams acc_params;     // requantization target of the accumulator
  QuantParams output_params;
  FixedMultiplier requant;
  std::vector<int8_t> lut;    // 256 entries for sigmoid stages
};

struct QuantizedModel {
  nlohmann::json arch;  // AeModel descriptor
  nlohmann::json metadata = nlohmann::json::object();
  QuantParams input_params;
  std::vector<QuantLayer> layers;

  int input_dim() const;
  int output_dim() const;
  long NumParams() const;
  // int8 weights, int32 biases and per-tensor params.
  long MemoryBytes() const;
};

QuantizedModel QuantizeModel(const AeModel& model, const CalibrationStats& stats);

struct Int8Output {
  Matrix reconstruction;
  long overflow_count = 0;
  // Dequantized output of every stage when requested.
  std::vector<Matrix> stage_outputs;
};

// Integer-only inference for one quantized input vector. Every stage output
// is written to stage_q when non-null.
std::vector<int8_t> Int8ForwardQuantized(const QuantizedModel& qm, std::span<const int8_t> x,
                                         long* overflow_count,
                                         std::vector<std::vector<int8_t>>* stage_q = nullptr);

// Quantizes x with the input params, runs the integer path and dequantizes.
Int8Output Int8Forward(const QuantizedModel& qm, const Matrix& x, bool keep_stages = false);

struct QuantReport {
  double mse_float = 0.0;
  double mse_int8 = 0.0;
  double snr_db = 0.0;  // float reconstruction vs int8 reconstruction
  std::vector<double> per_layer_mse;
  long float_bytes = 0;
  long int8_bytes = 0;
  long overflow_count = 0;

  nlohmann::json ToJson() const;
};

QuantReport MakeQuantReport(const AeModel& model, const QuantizedModel& qm, const Matrix& eval);

void SaveQuantizedModel(const std::filesystem::path& path, const QuantizedModel& qm);
QuantizedModel LoadQuantizedModel(const std::filesystem::path& path);

}  // namespace jamcomp

#endif  // JAMCOMP_QUANT_QUANT_H_
