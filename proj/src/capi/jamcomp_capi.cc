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

#include "jamcomp/jamcomp.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "classify/protocol.h"
#include "common/error.h"
#include "common/parallel.h"
#include "energy/energy.h"
#include "features/features.h"
#include "genmodels/factor_vae.h"
#include "nn/model_file.h"
#include "pipeline/pipeline.h"
#include "pipeline/workflow.h"
#include "quant/quant.h"
#include "synth/dataset.h"

struct jc_model {
  jamcomp::AeModel model;
};

struct jc_qmodel {
  jamcomp::QuantizedModel model;
};

namespace {

using jamcomp::ErrorCode;
using jamcomp::Fail;
using jamcomp::Require;
using nlohmann::json;
namespace fs = std::filesystem;

thread_local std::string g_last_error;

jc_status Guard(const std::function<void()>& fn) {
  try {
    fn();
    g_last_error.clear();
    return JC_OK;
  } catch (const jamcomp::Error& e) {
    g_last_error = e.what();
    return static_cast<jc_status>(static_cast<int>(e.code()));
  } catch (const json::exception& e) {
    g_last_error = std::string("bad JSON: ") + e.what();
    return JC_ERR_FORMAT;
  } catch (const fs::filesystem_error& e) {
    g_last_error = e.what();
    return JC_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return JC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return JC_ERR_INTERNAL;
  }
}

json ParseOptions(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("options are not valid JSON: ") + e.what());
  }
  Require(j.is_object(), ErrorCode::kInvalidArgument, "options must be a JSON object");
  return j;
}

void RequireArg(const void* p, const char* name) {
  Require(p != nullptr, ErrorCode::kInvalidArgument, std::string(name) + " must not be null");
}

void SetString(char** out, const std::string& s) {
  if (out == nullptr) return;
  char* buf = static_cast<char*>(std::malloc(s.size() + 1));
  if (buf == nullptr) throw std::bad_alloc();
  std::memcpy(buf, s.c_str(), s.size() + 1);
  *out = buf;
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<int> TestScenarios(const json& options) {
  if (options.contains("test_scenarios")) {
    return options["test_scenarios"].get<std::vector<int>>();
  }
  return jamcomp::DefaultDatasetSpec(1, 0).test_scenarios;
}

jamcomp::Matrix ToMatrix(const double* x, int rows, int cols) {
  RequireArg(x, "x");
  Require(rows > 0 && cols > 0, ErrorCode::kShape, "rows and cols must be positive");
  jamcomp::Matrix m(rows, cols);
  std::copy(x, x + static_cast<long>(rows) * cols, m.data().begin());
  return m;
}

json HistoryJson(const jamcomp::TrainHistory& h) {
  json epochs = json::array();
  for (const auto& e : h.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_mse", e.val_mse}});
  }
  return json{{"epochs", epochs},
              {"best_epoch", h.best_epoch},
              {"best_val_mse", h.best_val_mse},
              {"early_stopped", h.early_stopped}};
}

}  // namespace

extern "C" {

const char* jc_version(void) { return jamcomp::kToolVersion; }

jc_status jc_format_versions(char** out_json) {
  return Guard([&] {
    RequireArg(out_json, "out_json");
    SetString(out_json, jamcomp::FormatVersions().dump());
  });
}

const char* jc_last_error(void) { return g_last_error.c_str(); }

const char* jc_status_name(jc_status status) {
  if (status == JC_OK) return "ok";
  if (status == JC_ERR_INTERNAL) return "internal";
  const int v = static_cast<int>(status);
  if (v >= 1 && v <= static_cast<int>(ErrorCode::kNoArtifacts)) {
    return jamcomp::ErrorCodeName(static_cast<ErrorCode>(v));
  }
  return "unknown";
}

void jc_free_string(char* s) { std::free(s); }

jc_status jc_set_threads(int n) {
  return Guard([&] {
    Require(n >= 0, ErrorCode::kInvalidArgument, "thread count must be >= 0");
    jamcomp::SetMaxThreads(n);
  });
}

jc_status jc_synth_snapshot(const char* options_json, const char* out_path) {
  return Guard([&] {
    RequireArg(out_path, "out_path");
    const json o = ParseOptions(options_json);
    const auto scenarios = jamcomp::DefaultScenarios();
    jamcomp::ScenarioSpec scenario{0, o.value("attenuation_db", 20.0), {}};
    if (o.contains("scenario")) {
      const int id = o["scenario"].get<int>();
      Require(id >= 0 && id < static_cast<int>(scenarios.size()), ErrorCode::kInvalidArgument,
              "scenario must be in [0, " + std::to_string(scenarios.size()) + ")");
      scenario = scenarios[id];
      if (o.contains("attenuation_db")) scenario.attenuation_db = o["attenuation_db"];
    }
    const auto snap = jamcomp::MakeSnapshot(
        jamcomp::ParseWaveformClass(o.value("class", std::string("chirp"))), scenario,
        o.value("sample_rate_hz", 10e6), o.value("n_samples", 8192), o.value("jsr_db", 40.0),
        o.value("seed", uint64_t{0}));
    jamcomp::WriteIqFile(out_path, snap.iq);
  });
}

jc_status jc_synth_dataset(const char* options_json, const char* out_dir) {
  return Guard([&] {
    RequireArg(out_dir, "out_dir");
    const auto spec = jamcomp::DatasetSpecFromJson(ParseOptions(options_json), 0);
    jamcomp::WriteDataset(out_dir, jamcomp::MakeDataset(spec));
  });
}

jc_status jc_extract_features(const char* dataset_dir, const char* domain, const char* out_csv) {
  return Guard([&] {
    RequireArg(dataset_dir, "dataset_dir");
    RequireArg(out_csv, "out_csv");
    const auto d = jamcomp::ParseDomain(domain ? domain : "mixed");
    jamcomp::WriteFeatureCsv(out_csv,
                             jamcomp::ExtractFeatureSet(jamcomp::ReadDataset(dataset_dir), d));
  });
}

jc_status jc_search(const char* features_csv, const char* options_json, const char* out_dir,
                    char** out_json) {
  return Guard([&] {
    RequireArg(features_csv, "features_csv");
    RequireArg(out_dir, "out_dir");
    const json o = ParseOptions(options_json);
    const auto data = jamcomp::SplitFeatureSet(jamcomp::ReadFeatureCsv(features_csv),
                                               TestScenarios(o));
    const auto config = jamcomp::SearchConfig::FromJson(o.value("search", json::object()),
                                                        data.train.domain, 0);
    const auto outcome = jamcomp::RunSearch(data.train, config);
    fs::create_directories(out_dir);
    jamcomp::WriteSearchReport(fs::path(out_dir) / "search_report.csv", outcome.screened,
                               outcome.finalists);
    jamcomp::SaveModel(fs::path(out_dir) / "model.aem", outcome.model);
    const auto& best = outcome.finalists.at(outcome.best);
    SetString(out_json, json{{"screened", outcome.screened.size()},
                             {"finalists", outcome.finalists.size()},
                             {"best", best.arch.Descriptor()},
                             {"best_val_mse", best.val_mse},
                             {"best_f2", best.f2},
                             {"params", best.cost.n_params},
                             {"macs", best.cost.n_macs}}
                            .dump());
  });
}

jc_status jc_model_train(const char* features_csv, const char* options_json, jc_model** out,
                         char** history_json) {
  return Guard([&] {
    RequireArg(features_csv, "features_csv");
    RequireArg(out, "out");
    const json o = ParseOptions(options_json);
    Require(o.contains("arch"), ErrorCode::kInvalidArgument, "options need an arch descriptor");
    const auto data = jamcomp::SplitFeatureSet(jamcomp::ReadFeatureCsv(features_csv),
                                               TestScenarios(o));
    const auto arch = jamcomp::ArchSpec::FromDescriptor(o["arch"].get<std::string>());
    const auto budget = jamcomp::TrainBudget::FromJson(o.value("budget", json::object()));
    auto result = jamcomp::TrainOnFeatures(data.train, arch, budget);
    SetString(history_json, HistoryJson(result.history).dump());
    *out = new jc_model{std::move(result.model)};
  });
}

jc_status jc_model_load(const char* path, jc_model** out) {
  return Guard([&] {
    RequireArg(path, "path");
    RequireArg(out, "out");
    *out = new jc_model{jamcomp::LoadModel(path)};
  });
}

jc_status jc_model_save(const jc_model* model, const char* path) {
  return Guard([&] {
    RequireArg(model, "model");
    RequireArg(path, "path");
    jamcomp::SaveModel(path, model->model);
  });
}

void jc_model_free(jc_model* model) { delete model; }

jc_status jc_model_info(const jc_model* model, char** out_json) {
  return Guard([&] {
    RequireArg(model, "model");
    RequireArg(out_json, "out_json");
    const auto& m = model->model;
    SetString(out_json, json{{"arch", m.metadata.value("arch", std::string())},
                             {"descriptor", m.Descriptor()},
                             {"input_dim", m.input_dim()},
                             {"latent_dim", m.latent_dim()},
                             {"variational", m.variational()},
                             {"params", m.NumParams()},
                             {"macs", m.Macs()},
                             {"metadata", m.metadata}}
                            .dump());
  });
}

jc_status jc_model_reconstruct(const jc_model* model, const double* x, int rows, int cols,
                               double* out) {
  return Guard([&] {
    RequireArg(model, "model");
    RequireArg(out, "out");
    Require(cols == model->model.input_dim(), ErrorCode::kShape,
            "expected " + std::to_string(model->model.input_dim()) + " columns, got " +
                std::to_string(cols));
    const auto r = model->model.Infer(ToMatrix(x, rows, cols)).reconstruction;
    std::copy(r.data().begin(), r.data().end(), out);
  });
}

jc_status jc_quantize(const jc_model* model, const char* features_csv, const char* options_json,
                      jc_qmodel** out, char** report_json) {
  return Guard([&] {
    RequireArg(model, "model");
    RequireArg(features_csv, "features_csv");
    RequireArg(out, "out");
    const json o = ParseOptions(options_json);
    const auto data = jamcomp::SplitFeatureSet(jamcomp::ReadFeatureCsv(features_csv),
                                               TestScenarios(o));
    const auto cfg = jamcomp::CalibrationConfig::FromJson(o.value("quant", json::object()));
    auto q = jamcomp::QuantizeForFeatures(model->model, data.train, data.test, cfg);
    SetString(report_json, q.report.ToJson().dump());
    *out = new jc_qmodel{std::move(q.model)};
  });
}

jc_status jc_qmodel_load(const char* path, jc_qmodel** out) {
  return Guard([&] {
    RequireArg(path, "path");
    RequireArg(out, "out");
    *out = new jc_qmodel{jamcomp::LoadQuantizedModel(path)};
  });
}

jc_status jc_qmodel_save(const jc_qmodel* model, const char* path) {
  return Guard([&] {
    RequireArg(model, "model");
    RequireArg(path, "path");
    jamcomp::SaveQuantizedModel(path, model->model);
  });
}

void jc_qmodel_free(jc_qmodel* model) { delete model; }

jc_status jc_qmodel_forward(const jc_qmodel* model, const double* x, int rows, int cols,
                            double* out, long* overflow_count) {
  return Guard([&] {
    RequireArg(model, "model");
    RequireArg(out, "out");
    Require(cols == model->model.input_dim(), ErrorCode::kShape,
            "expected " + std::to_string(model->model.input_dim()) + " columns, got " +
                std::to_string(cols));
    const auto r = jamcomp::Int8Forward(model->model, ToMatrix(x, rows, cols), false);
    std::copy(r.reconstruction.data().begin(), r.reconstruction.data().end(), out);
    if (overflow_count) *overflow_count = r.overflow_count;
  });
}

jc_status jc_classify_protocol(const char* features_csv, const jc_model* model,
                               const jc_qmodel* qmodel, const char* options_json,
                               const char* out_dir, char** metrics_json) {
  return Guard([&] {
    RequireArg(features_csv, "features_csv");
    RequireArg(model, "model");
    RequireArg(qmodel, "qmodel");
    const json o = ParseOptions(options_json);
    const auto data = jamcomp::SplitFeatureSet(jamcomp::ReadFeatureCsv(features_csv),
                                               TestScenarios(o));
    const auto forest = jamcomp::ForestConfig::FromJson(o.value("forest", json::object()));
    const auto report =
        jamcomp::EvaluateProtocol(data.train, data.test, model->model, qmodel->model, forest);
    if (out_dir) report.WriteArtifacts(out_dir);
    SetString(metrics_json, report.ToJson().dump());
  });
}

jc_status jc_energy_report(const char* options_json, char** report_json, char** table_text) {
  return Guard([&] {
    const json o = ParseOptions(options_json);
    const auto report = jamcomp::MakeSavingsReport(
        jamcomp::PowerModel::FromJson(o.value("power", json::object())),
        jamcomp::TrafficModel::FromJson(o.value("traffic", json::object())),
        o.value("raw_rate_mb_per_s", 4.0), o.value("stated_residual", 0.67));
    SetString(report_json, report.ToJson().dump());
    SetString(table_text, report.FormatTable());
  });
}

jc_status jc_render_report(const char* dir, char** markdown) {
  return Guard([&] {
    RequireArg(dir, "dir");
    const std::string md = jamcomp::RenderReport(dir);
    WriteText(fs::path(dir) / "report.md", md);
    SetString(markdown, md);
  });
}

jc_status jc_interpolate(const char* options_json, const char* out_pgm, char** summary_json) {
  return Guard([&] {
    RequireArg(out_pgm, "out_pgm");
    const json o = ParseOptions(options_json);
    json ds = o.value("dataset", json::object());
    if (!ds.contains("classes")) {
      json classes = json::array();
      for (auto c : jamcomp::JammerClasses()) classes.push_back(jamcomp::WaveformClassName(c));
      ds["classes"] = classes;
    }
    const auto spec = jamcomp::DatasetSpecFromJson(ds, 0);
    const auto fv_cfg = jamcomp::FactorVaeConfig::FromJson(o.value("factor_vae", json::object()));
    const auto snapshots = jamcomp::MakeDataset(spec);
    const int side = fv_cfg.image_size;
    const auto images = jamcomp::SpectrogramImages(snapshots, side, side);
    const auto result = jamcomp::TrainFactorVae(fv_cfg, images);
    const int n = images.rows();
    std::vector<int> pair{0, n - 1};
    if (o.contains("pair")) pair = o["pair"].get<std::vector<int>>();
    Require(pair.size() == 2 && pair[0] >= 0 && pair[0] < n && pair[1] >= 0 && pair[1] < n,
            ErrorCode::kInvalidArgument, "pair must hold two image indices below " +
                                             std::to_string(n));
    const int steps = o.value("steps", 8);
    const auto strip = jamcomp::Interpolate(result.model, images.row(pair[0]),
                                            images.row(pair[1]), steps);
    jamcomp::WritePgmStrip(out_pgm, strip, side, side);
    if (o.contains("model_out")) result.model.Save(o["model_out"].get<std::string>());
    const auto recon = result.model.Reconstruct(images);
    double se = 0.0;
    for (size_t i = 0; i < recon.data().size(); ++i) {
      const double d = recon.data()[i] - images.data()[i];
      se += d * d;
    }
    const auto& last = result.history.back();
    SetString(summary_json,
              json{{"images", n},
                   {"epochs", result.history.size()},
                   {"recon_mse", se / static_cast<double>(recon.data().size())},
                   {"final_kl", last.kl},
                   {"final_tc", last.tc},
                   {"final_disc_loss", last.disc_loss},
                   {"params", result.model.NumParams()},
                   {"steps", steps},
                   {"pair", pair}}
                  .dump());
  });
}

jc_status jc_pipeline_run(const char* config_path, const char* overrides_json,
                          char** manifest_json) {
  return Guard([&] {
    RequireArg(config_path, "config_path");
    auto config = jamcomp::LoadExperimentConfig(config_path);
    const json o = ParseOptions(overrides_json);
    if (o.contains("output_dir")) config.output_dir = o["output_dir"].get<std::string>();
    if (o.contains("threads")) {
      config.threads = o["threads"].get<int>();
      Require(config.threads >= 0, ErrorCode::kInvalidArgument, "threads must be >= 0");
    }
    jamcomp::RunStats stats;
    const auto manifest = jamcomp::RunPipeline(config, &stats);
    json j = manifest.ToJson();
    j["executed"] = stats.executed;
    j["cached"] = stats.cached;
    j["output_dir"] = config.output_dir.string();
    SetString(manifest_json, j.dump());
  });
}

}  // extern "C"
