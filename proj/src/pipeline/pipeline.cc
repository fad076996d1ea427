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

#include "pipeline/pipeline.h"

#include <cstdlib>
#include <fstream>
#include <functional>

#include "classify/protocol.h"
#include "common/error.h"
#include "common/hash.h"
#include "common/parallel.h"
#include "common/rng.h"
#include "nn/model_file.h"

namespace jamcomp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kCacheDir[] = ".cache";

void WriteText(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, "bad JSON in " + path.string() + ": " + e.what());
  }
}

class StageRunner {
 public:
  StageRunner(const fs::path& root, RunManifest* manifest, RunStats* stats)
      : root_(root), manifest_(manifest), stats_(stats) {}

  // outputs are paths relative to the root (files or directories).
  void Run(const std::string& name, const std::vector<std::string>& inputs, const json& config,
           const std::vector<std::string>& outputs, const std::function<void()>& body) {
    StageRecord rec;
    rec.name = name;
    for (const auto& in : inputs) {
      const fs::path p = root_ / in;
      if (fs::is_directory(p)) {
        for (auto& [k, v] : ChecksumTree(p, root_)) rec.inputs[k] = v;
      } else {
        Require(fs::exists(p), ErrorCode::kIo, "stage " + name + " input missing: " + in);
        rec.inputs[in] = Sha256File(p);
      }
    }
    rec.key = Sha256Hex(json{{"stage", name},
                             {"inputs", rec.inputs},
                             {"config", config},
                             {"tool_version", kToolVersion}}
                            .dump());
    const fs::path cache_file = root_ / kCacheDir / (name + ".json");
    if (CacheHit(cache_file, rec)) {
      if (stats_) stats_->cached.push_back(name);
    } else {
      for (const auto& out : outputs) fs::remove_all(root_ / out);
      body();
      for (const auto& out : outputs) {
        const fs::path p = root_ / out;
        if (fs::is_directory(p)) {
          for (auto& [k, v] : ChecksumTree(p, root_)) rec.outputs[k] = v;
        } else {
          Require(fs::exists(p), ErrorCode::kIo, "stage " + name + " did not produce " + out);
          rec.outputs[out] = Sha256File(p);
        }
      }
      WriteText(cache_file, json{{"key", rec.key}, {"outputs", rec.outputs}}.dump(2) + "\n");
      if (stats_) stats_->executed.push_back(name);
    }
    manifest_->stages.push_back(std::move(rec));
  }

 private:
  bool CacheHit(const fs::path& cache_file, StageRecord& rec) const {
    if (!fs::exists(cache_file)) return false;
    json cached;
    try {
      cached = ReadJson(cache_file);
    } catch (const Error&) {
      return false;
    }
    if (cached.value("key", std::string()) != rec.key) return false;
    const auto outputs = cached.at("outputs").get<std::map<std::string, std::string>>();
    for (const auto& [path, sha] : outputs) {
      if (!fs::exists(root_ / path)) return false;
    }
    for (const auto& [path, sha] : outputs) {
      if (Sha256File(root_ / path) != sha) {
        Fail(ErrorCode::kChecksum, "checksum mismatch for cached artifact " + path);
      }
    }
    rec.outputs = outputs;
    return true;
  }

  fs::path root_;
  RunManifest* manifest_;
  RunStats* stats_;
};

}  // namespace

ExperimentConfig ExperimentConfig::FromJson(const json& j) {
  Require(j.is_object(), ErrorCode::kInvalidSpec, "config must be a JSON object");
  Require(j.contains("seed") && j["seed"].is_number_integer(), ErrorCode::kInvalidSpec,
          "config needs an integer seed");
  ExperimentConfig c;
  c.source = j;
  try {
    c.seed = j["seed"].get<uint64_t>();
    c.output_dir = j.value("output_dir", c.output_dir.string());
    c.threads = j.value("threads", 0);
    c.domain = ParseDomain(j.value("domain", std::string(DomainName(c.domain))));
    c.dataset = DatasetSpecFromJson(j.value("dataset", json::object()), MixSeed(c.seed, 1));
    c.search = SearchConfig::FromJson(j.value("search", json::object()), c.domain,
                                      MixSeed(c.seed, 2));
    c.quant = CalibrationConfig::FromJson(j.value("quant", json::object()));
    json forest = j.value("forest", json::object());
    if (!forest.contains("seed")) forest["seed"] = MixSeed(c.seed, 3);
    c.forest = ForestConfig::FromJson(forest);
    const json energy = j.value("energy", json::object());
    c.power = PowerModel::FromJson(energy.value("power", json::object()));
    c.traffic = TrafficModel::FromJson(energy.value("traffic", json::object()));
    c.raw_rate_mb_per_s = energy.value("raw_rate_mb_per_s", c.raw_rate_mb_per_s);
    c.stated_residual = energy.value("stated_residual", c.stated_residual);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidSpec, std::string("bad config: ") + e.what());
  }
  Require(c.threads >= 0, ErrorCode::kInvalidSpec, "threads must be >= 0");
  return c;
}

json ExperimentConfig::Resolved() const {
  return json{{"seed", seed},
              {"domain", DomainName(domain)},
              {"dataset", DatasetSpecToJson(dataset)},
              {"search", search.ToJson()},
              {"quant", quant.ToJson()},
              {"forest", forest.ToJson()},
              {"energy",
               {{"power", power.ToJson()},
                {"traffic", traffic.ToJson()},
                {"raw_rate_mb_per_s", raw_rate_mb_per_s},
                {"stated_residual", stated_residual}}}};
}

std::string ExperimentConfig::Hash() const { return Sha256Hex(Resolved().dump()); }

ExperimentConfig LoadExperimentConfig(const fs::path& path) {
  ExperimentConfig c = ExperimentConfig::FromJson(ReadJson(path));
  if (const char* dir = std::getenv(kEnvOutputDir); dir && *dir) c.output_dir = dir;
  if (const char* t = std::getenv(kEnvThreads); t && *t) {
    char* end = nullptr;
    const long n = std::strtol(t, &end, 10);
    Require(end && *end == '\0' && n >= 0, ErrorCode::kInvalidSpec,
            std::string(kEnvThreads) + " must be a non-negative integer");
    c.threads = static_cast<int>(n);
  }
  return c;
}

json RunManifest::ToJson() const {
  json stage_list = json::array();
  for (const auto& s : stages) {
    stage_list.push_back(
        {{"name", s.name}, {"key", s.key}, {"inputs", s.inputs}, {"outputs", s.outputs}});
  }
  json j{{"tool", "jamcomp"},
         {"tool_version", tool_version},
         {"formats", FormatVersions()},
         {"config_hash", config_hash},
         {"status", status},
         {"stages", stage_list}};
  if (status != "complete") {
    j["failed_stage"] = failed_stage;
    j["error"] = error;
  }
  return j;
}

RunManifest RunManifest::FromJson(const json& j) {
  RunManifest m;
  try {
    m.tool_version = j.at("tool_version");
    m.config_hash = j.at("config_hash");
    m.status = j.at("status");
    m.failed_stage = j.value("failed_stage", std::string());
    m.error = j.value("error", std::string());
    for (const auto& s : j.at("stages")) {
      m.stages.push_back({s.at("name"), s.at("key"),
                          s.at("inputs").get<std::map<std::string, std::string>>(),
                          s.at("outputs").get<std::map<std::string, std::string>>()});
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad manifest: ") + e.what());
  }
  return m;
}

std::map<std::string, std::string> ChecksumTree(const fs::path& dir, const fs::path& base) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), base).generic_string()] = Sha256File(e.path());
    }
  }
  return out;
}

json FormatVersions() {
  return json{{"iq", "IQF1"}, {"model", "AEM1"}, {"quantized_model", "AEQ1"},
              {"factor_vae", "FVA1"}, {"manifest", 1}};
}

RunManifest RunPipeline(const ExperimentConfig& config, RunStats* stats) {
  if (config.threads > 0) SetMaxThreads(config.threads);
  const fs::path root = config.output_dir;
  fs::create_directories(root);
  RunManifest manifest;
  manifest.config_hash = config.Hash();
  const json resolved = config.Resolved();
  const json split = config.dataset.test_scenarios;
  StageRunner runner(root, &manifest, stats);
  std::string current;

  auto load_split = [&] {
    return SplitFeatureSet(ReadFeatureCsv(root / "features.csv"), config.dataset.test_scenarios);
  };
  try {
    current = "synth";
    runner.Run(current, {}, resolved["dataset"], {"dataset"},
               [&] { WriteDataset(root / "dataset", MakeDataset(config.dataset)); });

    current = "features";
    runner.Run(current, {"dataset"}, {{"domain", DomainName(config.domain)}}, {"features.csv"},
               [&] {
                 WriteFeatureCsv(root / "features.csv",
                                 ExtractFeatureSet(ReadDataset(root / "dataset"), config.domain));
               });

    current = "search";
    runner.Run(current, {"features.csv"}, {{"search", resolved["search"]}, {"split", split}},
               {"search"}, [&] {
                 const auto data = load_split();
                 const auto outcome = RunSearch(data.train, config.search);
                 fs::create_directories(root / "search");
                 WriteSearchReport(root / "search" / "search_report.csv", outcome.screened,
                                   outcome.finalists);
                 SaveModel(root / "search" / "model.aem", outcome.model);
               });

    current = "quantize";
    runner.Run(current, {"features.csv", "search/model.aem"},
               {{"quant", resolved["quant"]}, {"split", split}}, {"quant"}, [&] {
                 const auto data = load_split();
                 const auto q = QuantizeForFeatures(LoadModel(root / "search" / "model.aem"),
                                                    data.train, data.test, config.quant);
                 fs::create_directories(root / "quant");
                 SaveQuantizedModel(root / "quant" / "model.aeq", q.model);
                 WriteText(root / "quant" / "quant_report.json", q.report.ToJson().dump(2) + "\n");
               });

    current = "classify";
    runner.Run(current, {"features.csv", "search/model.aem", "quant/model.aeq"},
               {{"forest", resolved["forest"]}, {"split", split}}, {"classify"}, [&] {
                 const auto data = load_split();
                 const auto report = EvaluateProtocol(
                     data.train, data.test, LoadModel(root / "search" / "model.aem"),
                     LoadQuantizedModel(root / "quant" / "model.aeq"), config.forest);
                 report.WriteArtifacts(root / "classify");
               });

    current = "energy";
    runner.Run(current, {}, resolved["energy"], {"energy"}, [&] {
      const auto report = MakeSavingsReport(config.power, config.traffic,
                                            config.raw_rate_mb_per_s, config.stated_residual);
      WriteText(root / "energy" / "energy.json", report.ToJson().dump(2) + "\n");
      WriteText(root / "energy" / "energy.txt", report.FormatTable());
    });

    current = "report";
    runner.Run(current,
               {"classify/metrics.json", "quant/quant_report.json", "energy/energy.json",
                "search/search_report.csv"},
               json::object(), {"report"}, [&] {
                 fs::create_directories(root / "report");
                 const std::string md = RenderReport(root, root / "report");
                 WriteText(root / "report" / "report.md", md);
               });
  } catch (const std::exception& e) {
    manifest.status = "partial";
    manifest.failed_stage = current;
    manifest.error = e.what();
    WriteText(root / "manifest.json", manifest.ToJson().dump(2) + "\n");
    throw;
  }
  WriteText(root / "manifest.json", manifest.ToJson().dump(2) + "\n");
  return manifest;
}

}  // namespace jamcomp
