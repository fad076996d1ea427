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

#include "pipeline/workflow.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "classify/metrics.h"
#include "common/error.h"
#include "energy/energy.h"

namespace jamcomp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, "bad JSON in " + path.string() + ": " + e.what());
  }
}

Matrix Normalized(const NormStats& norm, const FeatureSet& set) {
  return ApplyNormStats(norm, set.values).values;
}

std::vector<int> Pick(const std::vector<int>& v, const std::vector<int>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(v[r]);
  return out;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

DatasetSpec DatasetSpecFromJson(const json& j, uint64_t default_seed) {
  DatasetSpec spec = DefaultDatasetSpec(j.value("per_class", 50), j.value("seed", default_seed));
  try {
    if (j.contains("classes")) {
      spec.classes.clear();
      for (const auto& c : j["classes"]) spec.classes.push_back(ParseWaveformClass(c.get<std::string>()));
    }
    spec.n_samples = j.value("n_samples", spec.n_samples);
    spec.sample_rate_hz = j.value("sample_rate_hz", spec.sample_rate_hz);
    spec.jsr_db = j.value("jsr_db", spec.jsr_db);
    if (j.contains("test_scenarios")) {
      spec.test_scenarios = j["test_scenarios"].get<std::vector<int>>();
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidSpec, std::string("bad dataset config: ") + e.what());
  }
  spec.Validate();
  return spec;
}

json DatasetSpecToJson(const DatasetSpec& spec) {
  json classes = json::array();
  for (auto c : spec.classes) classes.push_back(WaveformClassName(c));
  return json{{"classes", classes},
              {"per_class", spec.per_class_count},
              {"n_samples", spec.n_samples},
              {"sample_rate_hz", spec.sample_rate_hz},
              {"jsr_db", spec.jsr_db},
              {"test_scenarios", spec.test_scenarios},
              {"seed", spec.seed}};
}

SplitFeatures SplitFeatureSet(const FeatureSet& set, const std::vector<int>& test_scenarios) {
  const auto split = SplitByScenario(set.scenario_ids, test_scenarios);
  Require(!split.train.empty() && !split.test.empty(), ErrorCode::kInvalidSpec,
          "scenario split leaves an empty train or test set");
  return {set.Subset(split.train), set.Subset(split.test)};
}

TrainResult TrainOnFeatures(const FeatureSet& train, const ArchSpec& arch,
                            const TrainBudget& budget) {
  budget.Validate();
  Require(train.values.cols() == arch.input_dim, ErrorCode::kShape,
          "architecture input does not match the feature width");
  const NormStats norm = FitNormStats(train.values);
  const Matrix x = ApplyNormStats(norm, train.values).values;
  std::vector<int> tr, val;
  SplitValidation(x.rows(), budget.val_fraction, budget.seed, &tr, &val);
  TrainOptions opt;
  opt.max_epochs = budget.retrain_epochs_max;
  opt.patience = budget.early_stop_patience;
  opt.batch_size = budget.batch_size;
  opt.learning_rate = budget.learning_rate;
  opt.kl_weight = budget.kl_weight;
  opt.seed = budget.seed;
  TrainResult result = TrainAutoencoder(arch.Build(budget.seed), x.SelectRows(tr),
                                        x.SelectRows(val), opt);
  const std::set<int> scenarios(train.scenario_ids.begin(), train.scenario_ids.end());
  result.model.metadata[kMetaNormStats] = norm.ToJson();
  result.model.metadata[kMetaTrainingScenarios] = std::vector<int>(scenarios.begin(), scenarios.end());
  result.model.metadata[kMetaDomain] = DomainName(train.domain);
  result.model.metadata["arch"] = arch.Descriptor();
  return result;
}

json SearchConfig::ToJson() const {
  json sel = {{"min_f2_delta", selection.min_f2_delta}};
  sel["max_latent"] = selection.max_latent ? json(*selection.max_latent) : json(nullptr);
  return json{{"space", space.ToJson()},
              {"top_k", top_k},
              {"max_archs", max_archs},
              {"budget", budget.ToJson()},
              {"selection", sel},
              {"selection_forest", selection_forest.ToJson()}};
}

SearchConfig SearchConfig::FromJson(const json& j, Domain domain, uint64_t default_seed) {
  SearchConfig c;
  c.space = DefaultSearchSpace(domain);
  try {
    if (j.contains("space")) {
      json s = j["space"];
      s["domain"] = DomainName(domain);
      c.space = SearchSpace::FromJson(s);
    }
    c.top_k = j.value("top_k", c.top_k);
    c.max_archs = j.value("max_archs", c.max_archs);
    json b = j.value("budget", json::object());
    if (!b.contains("seed")) b["seed"] = default_seed;
    c.budget = TrainBudget::FromJson(b);
    if (j.contains("selection")) {
      const auto& s = j["selection"];
      c.selection.min_f2_delta = s.value("min_f2_delta", c.selection.min_f2_delta);
      if (s.contains("max_latent") && !s["max_latent"].is_null()) {
        c.selection.max_latent = s["max_latent"].get<int>();
      }
    }
    json f = j.value("selection_forest", json{{"n_trees", 50}});
    if (!f.contains("seed")) f["seed"] = default_seed;
    c.selection_forest = ForestConfig::FromJson(f);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidSpec, std::string("bad search config: ") + e.what());
  }
  Require(c.top_k >= 1 && c.max_archs >= 0, ErrorCode::kInvalidSpec,
          "top_k must be >= 1 and max_archs >= 0");
  return c;
}

SearchOutcome RunSearch(const FeatureSet& train, const SearchConfig& config) {
  Require(train.values.cols() == config.space.input_dim, ErrorCode::kShape,
          "search space input does not match the feature width");
  const NormStats norm = FitNormStats(train.values);
  const Matrix x = ApplyNormStats(norm, train.values).values;
  std::vector<int> tr, val;
  SplitValidation(x.rows(), config.budget.val_fraction, config.budget.seed, &tr, &val);
  const Matrix xtr = x.SelectRows(tr), xval = x.SelectRows(val);

  auto archs = EnumerateArchs(config.space);
  if (config.max_archs > 0 && static_cast<int>(archs.size()) > config.max_archs) {
    archs.resize(config.max_archs);
  }
  SearchOutcome out{Screen(archs, xtr, xval, config.budget), {}, 0,
                    archs.front().Build(config.budget.seed)};
  const int k = std::min<int>(config.top_k, static_cast<int>(out.screened.size()));
  out.finalists = RetrainTopK(out.screened, k, xtr, xval, config.budget);

  const auto ytr = Pick(train.class_labels, tr), yval = Pick(train.class_labels, val);
  for (auto& f : out.finalists) {
    if (f.diverged) continue;
    const auto r = EvaluateRepresentation(f.model->Infer(xtr).reconstruction, ytr,
                                          f.model->Infer(xval).reconstruction, yval,
                                          kNumWaveformClasses, config.selection_forest);
    f.f2 = r.f2.macro;
    f.f05 = r.f05.macro;
  }
  out.best = SelectBest(out.finalists, config.selection);
  out.model = *out.finalists[out.best].model;
  const std::set<int> scenarios(train.scenario_ids.begin(), train.scenario_ids.end());
  out.model.metadata[kMetaNormStats] = norm.ToJson();
  out.model.metadata[kMetaTrainingScenarios] = std::vector<int>(scenarios.begin(), scenarios.end());
  out.model.metadata[kMetaDomain] = DomainName(train.domain);
  out.model.metadata["arch"] = out.finalists[out.best].arch.Descriptor();
  out.model.metadata["selection_f2"] = out.finalists[out.best].f2;
  return out;
}

QuantizeOutcome QuantizeForFeatures(const AeModel& model, const FeatureSet& train,
                                    const FeatureSet& eval, const CalibrationConfig& config) {
  const NormStats norm = ModelNormStats(model, train.values);
  const Matrix x = Normalized(norm, train);
  const int m = std::min(x.rows(), config.max_vectors);
  std::vector<int> rows(m);
  for (int i = 0; i < m; ++i) rows[i] = static_cast<int>(static_cast<long>(i) * x.rows() / m);
  const auto stats = Calibrate(model, x.SelectRows(rows), config);
  QuantizeOutcome out{QuantizeModel(model, stats), {}};
  out.model.metadata["calibration"] = config.ToJson();
  out.report = MakeQuantReport(model, out.model, Normalized(norm, eval));
  return out;
}

std::string RenderReport(const fs::path& dir, const fs::path& heatmap_dir) {
  Require(fs::is_directory(dir), ErrorCode::kNoArtifacts,
          "no artifacts: " + dir.string() + " is not a directory");
  std::vector<fs::path> metrics, quant, energy, search;
  for (auto it = fs::recursive_directory_iterator(dir); it != fs::recursive_directory_iterator();
       ++it) {
    const auto name = it->path().filename().string();
    // Hidden directories hold cache records, not artifacts.
    if (it->is_directory() && name.starts_with(".")) {
      it.disable_recursion_pending();
      continue;
    }
    if (!it->is_regular_file()) continue;
    const auto& e = *it;
    if (name == "metrics.json") metrics.push_back(e.path());
    if (name == "quant_report.json") quant.push_back(e.path());
    if (name == "energy.json") energy.push_back(e.path());
    if (name == "search_report.csv") search.push_back(e.path());
  }
  for (auto* v : {&metrics, &quant, &energy, &search}) std::sort(v->begin(), v->end());
  if (metrics.empty() && quant.empty() && energy.empty() && search.empty()) {
    Fail(ErrorCode::kNoArtifacts, "no artifacts found under " + dir.string());
  }
  std::ostringstream md;
  md << "# Results\n";
  for (const auto& p : metrics) {
    const json m = ReadJsonFile(p);
    md << "\n## Classification (" << fs::relative(p, dir).generic_string() << ")\n\n";
    md << "| task | model | F2 | F0.5 |\n|---|---|---|---|\n";
    for (const auto& r : m.at("results")) {
      md << "| " << r.at("task").get<std::string>() << " | "
         << r.at("model_variant").get<std::string>() << " | " << Fixed(r.at("f2"), 3) << " | "
         << Fixed(r.at("f05"), 3) << " |\n";
      const Task task = r.at("task") == "detection" ? Task::kDetection : Task::kClassification;
      const auto cm = ConfusionMatrix::FromJson(r.at("confusion"));
      const std::string stem = "cm_" + r.at("task").get<std::string>() + "_" +
                               r.at("model_variant").get<std::string>();
      const fs::path out_dir = heatmap_dir.empty() ? p.parent_path() : heatmap_dir;
      fs::create_directories(out_dir);
      WriteConfusionSvg(out_dir / (stem + ".svg"), cm, TaskClassNames(task),
                        r.at("task").get<std::string>() + " / " +
                            r.at("model_variant").get<std::string>());
    }
  }
  for (const auto& p : quant) {
    const json q = ReadJsonFile(p);
    md << "\n## Quantization (" << fs::relative(p, dir).generic_string() << ")\n\n";
    md << "| metric | value |\n|---|---|\n";
    md << "| reconstruction MSE, float | " << Fixed(q.at("mse_float"), 6) << " |\n";
    md << "| reconstruction MSE, int8 | " << Fixed(q.at("mse_int8"), 6) << " |\n";
    md << "| int8 vs float SNR (dB) | " << Fixed(q.at("snr_db"), 2) << " |\n";
    md << "| float size (bytes) | " << q.at("float_bytes").get<long>() << " |\n";
    md << "| int8 size (bytes) | " << q.at("int8_bytes").get<long>() << " |\n";
    md << "| accumulator overflows | " << q.at("overflow_count").get<long>() << " |\n";
  }
  for (const auto& p : energy) {
    const auto report = EnergyReport::FromJson(ReadJsonFile(p));
    md << "\n## Energy and traffic (" << fs::relative(p, dir).generic_string() << ")\n\n```\n"
       << report.FormatTable() << "```\n";
  }
  for (const auto& p : search) {
    std::ifstream in(p);
    std::string line;
    md << "\n## Architecture search (" << fs::relative(p, dir).generic_string() << ")\n\n";
    int n = 0;
    while (std::getline(in, line) && n <= 15) {
      std::string row = "| ";
      for (char c : line) row += c == ',' ? std::string(" | ") : std::string(1, c);
      md << row << " |\n";
      if (n++ == 0) {
        const auto cols = std::count(line.begin(), line.end(), ',') + 1;
        md << "|";
        for (long i = 0; i < cols; ++i) md << "---|";
        md << "\n";
      }
    }
  }
  return md.str();
}

}  // namespace jamcomp
