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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jamcomp/jamcomp.h"
#include "json.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Failure {
  jc_status status;
  std::string message;
};

void Check(jc_status s) {
  if (s != JC_OK) throw Failure{s, jc_last_error()};
}

// Owns a string handed out by the C API.
class CString {
 public:
  CString() = default;
  ~CString() { jc_free_string(p_); }
  CString(const CString&) = delete;
  CString& operator=(const CString&) = delete;
  char** out() { return &p_; }
  std::string str() const { return p_ ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{JC_ERR_IO, "cannot open " + path};
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Failure{JC_ERR_FORMAT, "bad JSON in " + path + ": " + e.what()};
  }
}

void PrintJson(const std::string& text) { std::cout << json::parse(text).dump(2) << "\n"; }

std::string WaveformList() {
  return "clean|noise|chirp|multitone|pulsed|frequency-hopper|modulated";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jamming-interference compression toolkit"};
  app.require_subcommand(1);
  int threads = -1;
  app.add_option("--threads", threads, "Cap on worker threads (0: hardware default)")
      ->check(CLI::NonNegativeNumber);
  app.set_version_flag("--version", [] {
    CString formats;
    jc_format_versions(formats.out());
    return std::string("jamcomp ") + jc_version() + "\nformats " + formats.str();
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize one snapshot or a labeled dataset");
  std::string s_class = "chirp", s_out, s_config;
  uint64_t s_seed = 0;
  int s_samples = 8192, s_per_class = 50;
  double s_fs = 10e6, s_jsr = 40.0, s_atten = 20.0;
  std::optional<int> s_scenario;
  bool s_dataset = false;
  synth->add_option("--class", s_class, "Waveform class: " + WaveformList());
  synth->add_option("--seed", s_seed, "Seed");
  synth->add_option("--n-samples", s_samples, "Complex samples per snapshot");
  synth->add_option("--sample-rate", s_fs, "Sample rate in Hz");
  synth->add_option("--jsr-db", s_jsr, "Jammer-to-noise ratio before attenuation");
  synth->add_option("--attenuation-db", s_atten, "Channel attenuation");
  synth->add_option("--scenario", s_scenario, "Predefined channel scenario id");
  synth->add_flag("--dataset", s_dataset, "Write a labeled dataset directory instead");
  synth->add_option("--per-class", s_per_class, "Dataset snapshots per class");
  synth->add_option("--config", s_config, "Dataset JSON (the config 'dataset' section)")
      ->check(CLI::ExistingFile);
  synth->add_option("-o,--out", s_out, "Output IQ file or dataset directory")->required();

  // features
  auto* feat = app.add_subcommand("features", "Extract a feature CSV from a dataset");
  std::string f_dataset, f_domain = "mixed", f_out;
  feat->add_option("--dataset", f_dataset, "Dataset directory")->required();
  feat->add_option("--domain", f_domain, "spectral|temporal|mixed|iq")
      ->check(CLI::IsMember({"spectral", "temporal", "mixed", "iq"}));
  feat->add_option("-o,--out", f_out, "Output CSV")->required();

  // search
  auto* search = app.add_subcommand("search", "Architecture search");
  std::string se_features, se_config, se_domain, se_out = "search";
  search->add_option("--features", se_features, "Feature CSV (otherwise synthesized from --config)");
  search->add_option("--config", se_config, "Experiment config JSON")->check(CLI::ExistingFile);
  search->add_option("--domain", se_domain, "spectral|temporal|mixed|iq")
      ->check(CLI::IsMember({"spectral", "temporal", "mixed", "iq"}));
  search->add_option("-o,--out-dir", se_out, "Output directory");

  // train
  auto* train = app.add_subcommand("train", "Train one autoencoder architecture");
  std::string t_features, t_arch, t_out;
  std::optional<int> t_epochs, t_patience, t_batch;
  std::optional<double> t_lr;
  uint64_t t_seed = 0;
  train->add_option("--features", t_features, "Feature CSV")->required();
  train->add_option("--arch", t_arch, "Descriptor, e.g. in177-h128x128-z6")->required();
  train->add_option("--epochs", t_epochs, "Maximum epochs");
  train->add_option("--patience", t_patience, "Early-stop patience");
  train->add_option("--batch-size", t_batch, "Mini-batch size");
  train->add_option("--lr", t_lr, "Learning rate");
  train->add_option("--seed", t_seed, "Seed");
  train->add_option("-o,--out", t_out, "Output model file (.aem)")->required();

  // quantize
  auto* quant = app.add_subcommand("quantize", "Post-training int8 quantization");
  std::string q_model, q_features, q_out, q_report, q_mode;
  std::optional<double> q_percentile;
  std::optional<int> q_max_vectors;
  quant->add_option("--model", q_model, "Float model (.aem)")->required();
  quant->add_option("--features", q_features, "Feature CSV")->required();
  quant->add_option("--calibration", q_mode, "minmax|percentile")
      ->check(CLI::IsMember({"minmax", "percentile"}));
  quant->add_option("--percentile", q_percentile, "Activation clipping percentile");
  quant->add_option("--max-vectors", q_max_vectors, "Calibration vectors");
  quant->add_option("-o,--out", q_out, "Output quantized model (.aeq)")->required();
  quant->add_option("--report", q_report, "Write the report JSON here too");

  // classify
  auto* classify = app.add_subcommand("classify", "Random-forest evaluation protocol");
  std::string c_protocol, c_features, c_model, c_qmodel, c_out = "classify";
  std::optional<int> c_trees;
  uint64_t c_seed = 0;
  classify->add_option("--protocol", c_protocol, "Evaluation protocol")
      ->required()
      ->check(CLI::IsMember({"three-way"}));
  classify->add_option("--features", c_features, "Feature CSV")->required();
  classify->add_option("--model", c_model, "Float model (.aem)")->required();
  classify->add_option("--qmodel", c_qmodel, "Quantized model (.aeq)")->required();
  classify->add_option("--trees", c_trees, "Trees per forest");
  classify->add_option("--seed", c_seed, "Forest seed");
  classify->add_option("-o,--out-dir", c_out, "Output directory");

  // energy
  auto* energy = app.add_subcommand("energy", "Energy and traffic accounting");
  json power = json::object(), traffic = json::object();
  std::optional<double> e_watts, e_spb, e_net, e_usd, e_rate, e_residual;
  std::optional<int> e_batch, e_values, e_block, e_latent, e_bytes;
  bool e_json = false;
  energy->add_option("--tpu-watts", e_watts, "Accelerator power in W");
  energy->add_option("--batch-size", e_batch, "Inferences per batch");
  energy->add_option("--seconds-per-batch", e_spb, "Seconds per batch");
  energy->add_option("--network-mwh", e_net, "Network energy per period in mWh");
  energy->add_option("--usd-per-gb", e_usd, "Cellular cost per GB");
  energy->add_option("--values-per-second", e_values, "Raw values per second");
  energy->add_option("--compressed-block", e_block, "Values the autoencoder compresses");
  energy->add_option("--latent", e_latent, "Latent values sent per block");
  energy->add_option("--bytes-per-value", e_bytes, "Bytes per value");
  energy->add_option("--raw-rate", e_rate, "Raw data rate in MB/s");
  energy->add_option("--stated-residual", e_residual, "Residual network fraction");
  energy->add_flag("--json", e_json, "Print only JSON");

  // report
  auto* report = app.add_subcommand("report", "Render metrics into markdown and SVG");
  std::string r_dir;
  report->add_option("dir", r_dir, "Run or stage directory")->required();

  // interpolate
  auto* interp = app.add_subcommand("interpolate", "Factorized VAE latent interpolation");
  std::string i_out, i_model_out, i_encoder;
  std::optional<int> i_per_class, i_epochs, i_latent, i_steps;
  std::optional<double> i_tc;
  std::vector<int> i_pair;
  uint64_t i_seed = 0;
  interp->add_option("--per-class", i_per_class, "Snapshots per jammer class");
  interp->add_option("--epochs", i_epochs, "Training epochs");
  interp->add_option("--latent", i_latent, "Latent dimension");
  interp->add_option("--tc", i_tc, "Total-correlation weight");
  interp->add_option("--encoder", i_encoder, "small-conv|deep-residual")
      ->check(CLI::IsMember({"small-conv", "deep-residual"}));
  interp->add_option("--steps", i_steps, "Interpolation steps");
  interp->add_option("--pair", i_pair, "Two image indices")->expected(2);
  interp->add_option("--seed", i_seed, "Seed");
  interp->add_option("--model-out", i_model_out, "Save the trained model (.fva)");
  interp->add_option("-o,--out", i_out, "Output PGM strip")->required();

  // run
  auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");
  std::string p_config, p_output;
  run->add_option("--config", p_config, "Experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--output-dir", p_output, "Overrides the configured output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (threads >= 0) Check(jc_set_threads(threads));

    if (*synth) {
      if (s_dataset) {
        json o = s_config.empty() ? json::object() : ReadJsonFile(s_config);
        if (o.contains("dataset")) o = o["dataset"];
        if (synth->count("--per-class")) o["per_class"] = s_per_class;
        if (!o.contains("per_class")) o["per_class"] = s_per_class;
        if (synth->count("--seed")) o["seed"] = s_seed;
        if (synth->count("--n-samples")) o["n_samples"] = s_samples;
        if (synth->count("--sample-rate")) o["sample_rate_hz"] = s_fs;
        if (synth->count("--jsr-db")) o["jsr_db"] = s_jsr;
        Check(jc_synth_dataset(o.dump().c_str(), s_out.c_str()));
      } else {
        json o{{"class", s_class}, {"seed", s_seed},     {"n_samples", s_samples},
               {"sample_rate_hz", s_fs}, {"jsr_db", s_jsr}};
        if (s_scenario) o["scenario"] = *s_scenario;
        if (!s_scenario || synth->count("--attenuation-db")) o["attenuation_db"] = s_atten;
        Check(jc_synth_snapshot(o.dump().c_str(), s_out.c_str()));
      }
      std::cout << "wrote " << s_out << "\n";
    } else if (*feat) {
      Check(jc_extract_features(f_dataset.c_str(), f_domain.c_str(), f_out.c_str()));
      std::cout << "wrote " << f_out << "\n";
    } else if (*search) {
      if (se_features.empty() == se_config.empty() && se_features.empty()) {
        std::cerr << "search needs --features or --config\n";
        return kExitUsage;
      }
      json cfg = se_config.empty() ? json::object() : ReadJsonFile(se_config);
      json o{{"search", cfg.value("search", json::object())}};
      if (cfg.contains("seed") && !o["search"].contains("budget")) {
        o["search"]["budget"] = json::object();
      }
      if (cfg.contains("seed") && !o["search"]["budget"].contains("seed")) {
        o["search"]["budget"]["seed"] = cfg["seed"];
      }
      if (cfg.contains("dataset") && cfg["dataset"].contains("test_scenarios")) {
        o["test_scenarios"] = cfg["dataset"]["test_scenarios"];
      }
      std::string features = se_features;
      fs::create_directories(se_out);
      if (features.empty()) {
        const std::string domain =
            se_domain.empty() ? cfg.value("domain", std::string("mixed")) : se_domain;
        json ds = cfg.value("dataset", json::object());
        if (!ds.contains("seed") && cfg.contains("seed")) ds["seed"] = cfg["seed"];
        const std::string dataset_dir = (fs::path(se_out) / "dataset").string();
        features = (fs::path(se_out) / "features.csv").string();
        Check(jc_synth_dataset(ds.dump().c_str(), dataset_dir.c_str()));
        Check(jc_extract_features(dataset_dir.c_str(), domain.c_str(), features.c_str()));
      }
      CString summary;
      Check(jc_search(features.c_str(), o.dump().c_str(), se_out.c_str(), summary.out()));
      PrintJson(summary.str());
    } else if (*train) {
      json budget{{"seed", t_seed}};
      if (t_epochs) budget["retrain_epochs_max"] = *t_epochs;
      if (t_patience) budget["early_stop_patience"] = *t_patience;
      if (t_batch) budget["batch_size"] = *t_batch;
      if (t_lr) budget["learning_rate"] = *t_lr;
      const json o{{"arch", t_arch}, {"budget", budget}};
      jc_model* model = nullptr;
      CString history;
      Check(jc_model_train(t_features.c_str(), o.dump().c_str(), &model, history.out()));
      const jc_status s = jc_model_save(model, t_out.c_str());
      jc_model_free(model);
      Check(s);
      const json h = json::parse(history.str());
      std::cout << "wrote " << t_out << " (best epoch " << h["best_epoch"] << ", val mse "
                << h["best_val_mse"] << ")\n";
    } else if (*quant) {
      json qc = json::object();
      if (!q_mode.empty()) qc["mode"] = q_mode;
      if (q_percentile) qc["percentile"] = *q_percentile;
      if (q_max_vectors) qc["max_vectors"] = *q_max_vectors;
      jc_model* model = nullptr;
      Check(jc_model_load(q_model.c_str(), &model));
      jc_qmodel* qmodel = nullptr;
      CString rep;
      jc_status s = jc_quantize(model, q_features.c_str(), json{{"quant", qc}}.dump().c_str(),
                                &qmodel, rep.out());
      jc_model_free(model);
      Check(s);
      s = jc_qmodel_save(qmodel, q_out.c_str());
      jc_qmodel_free(qmodel);
      Check(s);
      if (!q_report.empty()) {
        std::ofstream(q_report) << json::parse(rep.str()).dump(2) << "\n";
      }
      PrintJson(rep.str());
    } else if (*classify) {
      json forest{{"seed", c_seed}};
      if (c_trees) forest["n_trees"] = *c_trees;
      jc_model* model = nullptr;
      jc_qmodel* qmodel = nullptr;
      Check(jc_model_load(c_model.c_str(), &model));
      jc_status s = jc_qmodel_load(c_qmodel.c_str(), &qmodel);
      CString metrics;
      if (s == JC_OK) {
        s = jc_classify_protocol(c_features.c_str(), model, qmodel,
                                 json{{"forest", forest}}.dump().c_str(), c_out.c_str(),
                                 metrics.out());
      }
      jc_model_free(model);
      jc_qmodel_free(qmodel);
      Check(s);
      PrintJson(metrics.str());
    } else if (*energy) {
      if (e_watts) power["tpu_watts"] = *e_watts;
      if (e_batch) power["batch_size"] = *e_batch;
      if (e_spb) power["seconds_per_batch"] = *e_spb;
      if (e_net) power["network_mwh_per_period"] = *e_net;
      if (e_usd) power["cellular_usd_per_gb"] = *e_usd;
      if (e_values) traffic["values_per_second"] = *e_values;
      if (e_block) traffic["compressed_block"] = *e_block;
      if (e_latent) traffic["latent_values"] = *e_latent;
      if (e_bytes) traffic["bytes_per_value"] = *e_bytes;
      json o{{"power", power}, {"traffic", traffic}};
      if (e_rate) o["raw_rate_mb_per_s"] = *e_rate;
      if (e_residual) o["stated_residual"] = *e_residual;
      CString rep, table;
      Check(jc_energy_report(o.dump().c_str(), rep.out(), table.out()));
      if (!e_json) std::cout << table.str() << "\n";
      PrintJson(rep.str());
    } else if (*report) {
      CString md;
      Check(jc_render_report(r_dir.c_str(), md.out()));
      std::cout << md.str();
    } else if (*interp) {
      json ds{{"seed", i_seed}};
      if (i_per_class) ds["per_class"] = *i_per_class;
      json fv{{"seed", i_seed}};
      if (i_epochs) fv["epochs"] = *i_epochs;
      if (i_latent) fv["latent_dim"] = *i_latent;
      if (i_tc) fv["tc_weight"] = *i_tc;
      if (!i_encoder.empty()) fv["encoder"] = i_encoder;
      json o{{"dataset", ds}, {"factor_vae", fv}};
      if (i_steps) o["steps"] = *i_steps;
      if (!i_pair.empty()) o["pair"] = i_pair;
      if (!i_model_out.empty()) o["model_out"] = i_model_out;
      CString summary;
      Check(jc_interpolate(o.dump().c_str(), i_out.c_str(), summary.out()));
      PrintJson(summary.str());
    } else if (*run) {
      json o = json::object();
      if (!p_output.empty()) o["output_dir"] = p_output;
      if (threads >= 0) o["threads"] = threads;
      CString manifest;
      Check(jc_pipeline_run(p_config.c_str(), o.dump().c_str(), manifest.out()));
      const json m = json::parse(manifest.str());
      std::cout << "output " << m["output_dir"].get<std::string>() << "\n";
      for (const auto& s : m["stages"]) {
        const std::string name = s["name"];
        const bool cached = std::find(m["cached"].begin(), m["cached"].end(), name) !=
                            m["cached"].end();
        std::cout << "  " << name << (cached ? "  cached" : "  ran") << "\n";
      }
    }
  } catch (const Failure& f) {
    std::cerr << "error [" << jc_status_name(f.status) << "]: " << f.message << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
