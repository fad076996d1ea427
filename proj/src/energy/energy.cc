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

#include "energy/energy.h"

#include <cmath>
#include <cstdio>

#include "common/error.h"

namespace jamcomp {

using nlohmann::json;

namespace {

constexpr double kSecondsPerHour = 3600.0;
constexpr double kSecondsPerDay = 86400.0;
constexpr double kMbPerGb = 1000.0;

json EnergyJson(const Energy& e) { return json{{"ws", e.ws}, {"uwh", e.uwh}, {"mwh", e.mwh}}; }

Energy EnergyFrom(const json& j) {
  return {j.at("ws").get<double>(), j.at("uwh").get<double>(), j.at("mwh").get<double>()};
}

json NetworkJson(const NetworkEnergy& n) {
  return json{{"new_mwh", n.new_mwh}, {"saved_mwh", n.saved_mwh}, {"tpu_ratio", n.tpu_ratio}};
}

NetworkEnergy NetworkFrom(const json& j) {
  return {j.at("new_mwh").get<double>(), j.at("saved_mwh").get<double>(),
          j.at("tpu_ratio").get<double>()};
}

}  // namespace

void PowerModel::Validate() const {
  Require(tpu_watts > 0 && batch_size > 0 && seconds_per_batch > 0 &&
              network_mwh_per_period > 0 && cellular_usd_per_gb > 0,
          ErrorCode::kInvalidSpec, "power model values must be positive");
}

json PowerModel::ToJson() const {
  return json{{"tpu_watts", tpu_watts},
              {"batch_size", batch_size},
              {"seconds_per_batch", seconds_per_batch},
              {"network_mwh_per_period", network_mwh_per_period},
              {"cellular_usd_per_gb", cellular_usd_per_gb}};
}

PowerModel PowerModel::FromJson(const json& j) {
  PowerModel p;
  p.tpu_watts = j.value("tpu_watts", p.tpu_watts);
  p.batch_size = j.value("batch_size", p.batch_size);
  p.seconds_per_batch = j.value("seconds_per_batch", p.seconds_per_batch);
  p.network_mwh_per_period = j.value("network_mwh_per_period", p.network_mwh_per_period);
  p.cellular_usd_per_gb = j.value("cellular_usd_per_gb", p.cellular_usd_per_gb);
  p.Validate();
  return p;
}

void TrafficModel::Validate() const {
  Require(values_per_second > 0 && compressed_block > 0 && latent_values > 0 &&
              bytes_per_value > 0,
          ErrorCode::kInvalidSpec, "traffic model values must be positive");
  Require(compressed_block <= values_per_second, ErrorCode::kInvalidSpec,
          "compressed block cannot exceed the values per second");
  Require(latent_values <= compressed_block, ErrorCode::kInvalidSpec,
          "latent values cannot exceed the compressed block");
}

json TrafficModel::ToJson() const {
  return json{{"values_per_second", values_per_second},
              {"compressed_block", compressed_block},
              {"latent_values", latent_values},
              {"bytes_per_value", bytes_per_value}};
}

TrafficModel TrafficModel::FromJson(const json& j) {
  TrafficModel t;
  t.values_per_second = j.value("values_per_second", t.values_per_second);
  t.compressed_block = j.value("compressed_block", t.compressed_block);
  t.latent_values = j.value("latent_values", t.latent_values);
  t.bytes_per_value = j.value("bytes_per_value", t.bytes_per_value);
  t.Validate();
  return t;
}

Energy EnergyFromWs(double ws) {
  const double wh = ws / kSecondsPerHour;
  return {ws, wh * 1e6, wh * 1e3};
}

Energy TpuEnergy(const PowerModel& pm, long batches, double seconds_per_batch) {
  Require(batches >= 0 && seconds_per_batch >= 0, ErrorCode::kInvalidArgument,
          "batches and duty time must be non-negative");
  return EnergyFromWs(pm.tpu_watts * static_cast<double>(batches) * seconds_per_batch);
}

TrafficReduction ComputeTrafficReduction(const TrafficModel& tm) {
  tm.Validate();
  TrafficReduction r;
  r.transmitted_values = tm.values_per_second - tm.compressed_block + tm.latent_values;
  r.residual_fraction = static_cast<double>(r.transmitted_values) / tm.values_per_second;
  r.reduction_percent = 100.0 * (1.0 - r.residual_fraction);
  r.compression_factor = static_cast<double>(tm.compressed_block) / tm.latent_values;
  r.end_to_end_factor = static_cast<double>(tm.values_per_second) / tm.latent_values;
  r.end_to_end_rate_percent =
      100.0 * (1.0 - static_cast<double>(tm.latent_values) / tm.values_per_second);
  r.bytes_per_second_before = static_cast<double>(tm.values_per_second) * tm.bytes_per_value;
  r.bytes_per_second_after = static_cast<double>(r.transmitted_values) * tm.bytes_per_value;
  return r;
}

NetworkEnergy ComputeNetworkEnergy(const PowerModel& pm, double residual_fraction) {
  pm.Validate();
  Require(residual_fraction >= 0.0 && residual_fraction <= 1.0, ErrorCode::kInvalidArgument,
          "residual fraction must be in [0, 1]");
  NetworkEnergy n;
  n.new_mwh = pm.network_mwh_per_period * residual_fraction;
  n.saved_mwh = pm.network_mwh_per_period - n.new_mwh;
  n.tpu_ratio = n.saved_mwh / TpuEnergy(pm, 1, pm.seconds_per_batch).mwh;
  return n;
}

DailyTrafficCost ComputeDailyTrafficCost(double rate_mb_per_s, double usd_per_gb) {
  Require(rate_mb_per_s >= 0 && usd_per_gb >= 0, ErrorCode::kInvalidArgument,
          "rate and price must be non-negative");
  DailyTrafficCost c;
  c.gb_per_day = rate_mb_per_s * kSecondsPerDay / kMbPerGb;
  c.usd_per_day = c.gb_per_day * usd_per_gb;
  return c;
}

EnergyReport MakeSavingsReport(const PowerModel& pm, const TrafficModel& tm,
                               double raw_rate_mb_per_s, double stated_residual) {
  pm.Validate();
  EnergyReport r;
  r.power = pm;
  r.traffic = tm;
  r.raw_rate_mb_per_s = raw_rate_mb_per_s;
  r.stated_residual = stated_residual;
  r.tpu_per_batch = TpuEnergy(pm, 1, pm.seconds_per_batch);
  r.reduction = ComputeTrafficReduction(tm);
  r.network_side_channel = ComputeNetworkEnergy(pm, r.reduction.residual_fraction);
  r.network_stated = ComputeNetworkEnergy(pm, stated_residual);
  r.daily = ComputeDailyTrafficCost(raw_rate_mb_per_s, pm.cellular_usd_per_gb);
  r.one_percent_mwh = pm.network_mwh_per_period / 100.0;
  r.one_percent_tpu_ratio = r.one_percent_mwh / r.tpu_per_batch.mwh;
  return r;
}

json EnergyReport::ToJson() const {
  const auto& t = reduction;
  return json{
      {"power", power.ToJson()},
      {"traffic", traffic.ToJson()},
      {"raw_rate_mb_per_s", raw_rate_mb_per_s},
      {"stated_residual", stated_residual},
      {"tpu_per_batch", EnergyJson(tpu_per_batch)},
      {"reduction",
       {{"transmitted_values", t.transmitted_values},
        {"residual_fraction", t.residual_fraction},
        {"reduction_percent", t.reduction_percent},
        {"compression_factor", t.compression_factor},
        {"end_to_end_factor", t.end_to_end_factor},
        {"end_to_end_rate_percent", t.end_to_end_rate_percent},
        {"bytes_per_second_before", t.bytes_per_second_before},
        {"bytes_per_second_after", t.bytes_per_second_after}}},
      {"network_side_channel", NetworkJson(network_side_channel)},
      {"network_stated", NetworkJson(network_stated)},
      {"daily", {{"gb_per_day", daily.gb_per_day}, {"usd_per_day", daily.usd_per_day}}},
      {"one_percent_mwh", one_percent_mwh},
      {"one_percent_tpu_ratio", one_percent_tpu_ratio}};
}

EnergyReport EnergyReport::FromJson(const json& j) {
  EnergyReport r;
  try {
    r.power = PowerModel::FromJson(j.at("power"));
    r.traffic = TrafficModel::FromJson(j.at("traffic"));
    r.raw_rate_mb_per_s = j.at("raw_rate_mb_per_s");
    r.stated_residual = j.at("stated_residual");
    r.tpu_per_batch = EnergyFrom(j.at("tpu_per_batch"));
    const auto& t = j.at("reduction");
    r.reduction.transmitted_values = t.at("transmitted_values");
    r.reduction.residual_fraction = t.at("residual_fraction");
    r.reduction.reduction_percent = t.at("reduction_percent");
    r.reduction.compression_factor = t.at("compression_factor");
    r.reduction.end_to_end_factor = t.at("end_to_end_factor");
    r.reduction.end_to_end_rate_percent = t.at("end_to_end_rate_percent");
    r.reduction.bytes_per_second_before = t.at("bytes_per_second_before");
    r.reduction.bytes_per_second_after = t.at("bytes_per_second_after");
    r.network_side_channel = NetworkFrom(j.at("network_side_channel"));
    r.network_stated = NetworkFrom(j.at("network_stated"));
    r.daily = {j.at("daily").at("gb_per_day").get<double>(),
               j.at("daily").at("usd_per_day").get<double>()};
    r.one_percent_mwh = j.at("one_percent_mwh");
    r.one_percent_tpu_ratio = j.at("one_percent_tpu_ratio");
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad energy report: ") + e.what());
  }
  return r;
}

std::string EnergyReport::FormatTable() const {
  std::string s;
  char buf[256];
  auto row = [&](const char* name, const char* fmt, double v) {
    char val[64];
    std::snprintf(val, sizeof(val), fmt, v);
    std::snprintf(buf, sizeof(buf), "  %-44s %16s\n", name, val);
    s += buf;
  };
  s += "Traffic\n";
  row("raw sensor rate (MB/s)", "%.3f", raw_rate_mb_per_s);
  row("raw traffic per day (GB)", "%.1f", daily.gb_per_day);
  row("raw traffic cost per day (USD)", "%.2f", daily.usd_per_day);
  row("values per second", "%.0f", traffic.values_per_second);
  row("transmitted values per second", "%.0f", reduction.transmitted_values);
  row("reduction with side channel (%)", "%.1f", reduction.reduction_percent);
  row("block compression factor", "%.1f", reduction.compression_factor);
  row("end-to-end compression factor", "%.1f", reduction.end_to_end_factor);
  row("end-to-end compression rate (%)", "%.1f", reduction.end_to_end_rate_percent);
  s += "Energy\n";
  row("accelerator power (W)", "%.2f", power.tpu_watts);
  row("accelerator energy per batch (Ws)", "%.4g", tpu_per_batch.ws);
  row("accelerator energy per batch (uWh)", "%.4g", tpu_per_batch.uwh);
  row("network energy per period (mWh)", "%.1f", power.network_mwh_per_period);
  row("network energy, stated residual (mWh)", "%.1f", network_stated.new_mwh);
  row("saved, stated residual (mWh)", "%.1f", network_stated.saved_mwh);
  row("saved / accelerator energy, stated", "%.1f", network_stated.tpu_ratio);
  row("network energy, side-channel residual (mWh)", "%.1f", network_side_channel.new_mwh);
  row("saved, side-channel residual (mWh)", "%.1f", network_side_channel.saved_mwh);
  row("1% of network energy (mWh)", "%.2f", one_percent_mwh);
  row("1% of network / accelerator energy", "%.2f", one_percent_tpu_ratio);
  return s;
}

}  // namespace jamcomp
