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

#ifndef JAMCOMP_ENERGY_ENERGY_H_
#define JAMCOMP_ENERGY_ENERGY_H_

#include <string>

#include "json.hpp"

namespace jamcomp {

struct PowerModel {
  double tpu_watts = 1.6;
  int batch_size = 1000;
  double seconds_per_batch = 1.0;
  double network_mwh_per_period = 394.0;
  double cellular_usd_per_gb = 2.6;

  void Validate() const;
  nlohmann::json ToJson() const;
  static PowerModel FromJson(const nlohmann::json& j);
};

struct TrafficModel {
  int values_per_second = 253;
  int compressed_block = 177;
  int latent_values = 6;
  int bytes_per_value = 4;

  void Validate() const;
  nlohmann::json ToJson() const;
  static TrafficModel FromJson(const nlohmann::json& j);
};

struct Energy {
  double ws = 0.0;
  double uwh = 0.0;
  double mwh = 0.0;
};

Energy EnergyFromWs(double ws);

// Accelerator energy for a number of batches at the model's power draw.
Energy TpuEnergy(const PowerModel& pm, long batches, double seconds_per_batch);

struct TrafficReduction {
  int transmitted_values = 0;       // uncompressed side channel + latents
  double residual_fraction = 1.0;   // transmitted / values_per_second
  double reduction_percent = 0.0;
  double compression_factor = 1.0;  // compressed_block / latent_values
  double end_to_end_factor = 1.0;   // values_per_second / latent_values
  double end_to_end_rate_percent = 0.0;
  double bytes_per_second_before = 0.0;
  double bytes_per_second_after = 0.0;
};

TrafficReduction ComputeTrafficReduction(const TrafficModel& tm);

struct NetworkEnergy {
  double new_mwh = 0.0;
  double saved_mwh = 0.0;
  double tpu_ratio = 0.0;  // saved energy over one batch of accelerator energy
};

NetworkEnergy ComputeNetworkEnergy(const PowerModel& pm, double residual_fraction);

struct DailyTrafficCost {
  double gb_per_day = 0.0;
  double usd_per_day = 0.0;
};

DailyTrafficCost ComputeDailyTrafficCost(double rate_mb_per_s, double usd_per_gb);

struct EnergyReport {
  PowerModel power;
  TrafficModel traffic;
  double raw_rate_mb_per_s = 4.0;
  double stated_residual = 0.67;

  Energy tpu_per_batch;
  TrafficReduction reduction;
  NetworkEnergy network_side_channel;  // residual from the traffic model
  NetworkEnergy network_stated;        // residual as stated
  DailyTrafficCost daily;
  double one_percent_mwh = 0.0;        // 1% of the network budget
  double one_percent_tpu_ratio = 0.0;

  nlohmann::json ToJson() const;
  static EnergyReport FromJson(const nlohmann::json& j);
  std::string FormatTable() const;
};

EnergyReport MakeSavingsReport(const PowerModel& pm, const TrafficModel& tm,
                               double raw_rate_mb_per_s = 4.0, double stated_residual = 0.67);

}  // namespace jamcomp

#endif  // JAMCOMP_ENERGY_ENERGY_H_
