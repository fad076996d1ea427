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

#include "search/arch_search.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "common/error.h"
#include "common/parallel.h"

namespace jamcomp {

using nlohmann::json;

namespace {

// Scale + zero point for the weights and for the output activation of one
// affine layer, padded to 16 bytes.
constexpr long kQuantMetaBytesPerLayer = 16;

int ParseIntAfter(const std::string& token, size_t pos) {
  try {
    return std::stoi(token.substr(pos));
  } catch (const std::exception&) {
    Fail(ErrorCode::kFormat, "bad architecture token '" + token + "'");
  }
}

}  // namespace

void ArchSpec::Validate() const {
  Require(input_dim > 0 && input_channels >= 1 && input_dim % input_channels == 0,
          ErrorCode::kInvalidSpec, "input dimension must be a positive multiple of channels");
  Require(!hidden_widths.empty(), ErrorCode::kInvalidSpec, "need at least one hidden layer");
  for (size_t i = 0; i < hidden_widths.size(); ++i) {
    Require(hidden_widths[i] > 0, ErrorCode::kInvalidSpec, "hidden widths must be positive");
    Require(i == 0 || hidden_widths[i] <= hidden_widths[i - 1], ErrorCode::kInvalidSpec,
            "a deeper layer may not be wider than a shallower one");
  }
  Require(latent_dim >= 1 && latent_dim < hidden_widths.back(), ErrorCode::kInvalidSpec,
          "latent dimension must be below the last hidden width");
  Require(input_channels == 1 || !conv_front.empty(), ErrorCode::kInvalidSpec,
          "multi-channel input needs a conv front");
  for (const auto& c : conv_front) {
    Require(c.out_ch > 0 && c.kernel > 0 && (c.stride == 1 || c.stride == 2),
            ErrorCode::kInvalidSpec, "conv front layers need stride 1 or 2");
  }
}

std::string ArchSpec::Descriptor() const {
  std::ostringstream s;
  s << "in";
  if (input_channels > 1 || !conv_front.empty()) {
    s << input_channels << 'x' << input_dim / input_channels;
  } else {
    s << input_dim;
  }
  for (const auto& c : conv_front) s << "-c" << c.out_ch << 'k' << c.kernel << 's' << c.stride;
  s << "-h";
  for (size_t i = 0; i < hidden_widths.size(); ++i) s << (i ? "x" : "") << hidden_widths[i];
  s << "-z" << latent_dim;
  if (variational) s << "-vae";
  return s.str();
}

ArchSpec ArchSpec::FromDescriptor(const std::string& descriptor) {
  ArchSpec a;
  std::stringstream ss(descriptor);
  std::string tok;
  while (std::getline(ss, tok, '-')) {
    if (tok.rfind("in", 0) == 0) {
      const auto x = tok.find('x');
      if (x == std::string::npos) {
        a.input_dim = ParseIntAfter(tok, 2);
      } else {
        a.input_channels = ParseIntAfter(tok.substr(0, x), 2);
        a.input_dim = a.input_channels * ParseIntAfter(tok, x + 1);
      }
    } else if (tok[0] == 'c') {
      ConvSpec c;
      const auto k = tok.find('k'), s = tok.find('s');
      Require(k != std::string::npos && s != std::string::npos, ErrorCode::kFormat,
              "bad conv token '" + tok + "'");
      c.out_ch = ParseIntAfter(tok.substr(0, k), 1);
      c.kernel = ParseIntAfter(tok.substr(0, s), k + 1);
      c.stride = ParseIntAfter(tok, s + 1);
      a.conv_front.push_back(c);
    } else if (tok[0] == 'h') {
      std::stringstream ws(tok.substr(1));
      std::string w;
      while (std::getline(ws, w, 'x')) a.hidden_widths.push_back(ParseIntAfter(w, 0));
    } else if (tok[0] == 'z') {
      a.latent_dim = ParseIntAfter(tok, 1);
    } else if (tok == "vae") {
      a.variational = true;
    } else {
      Fail(ErrorCode::kFormat, "bad architecture token '" + tok + "'");
    }
  }
  a.Validate();
  return a;
}

std::vector<LayerSpec> ArchSpec::EncoderSpecs() const {
  Validate();
  std::vector<LayerSpec> specs;
  int channels = input_channels;
  int length = input_dim / input_channels;
  for (const auto& c : conv_front) {
    auto s = LayerSpec::MakeConv1d(channels, length, c.out_ch, c.kernel, c.stride,
                                   Activation::kReLU);
    channels = c.out_ch;
    length = s.out_len();
    specs.push_back(s);
  }
  int prev = channels * length;
  for (int w : hidden_widths) {
    specs.push_back(LayerSpec::MakeDense(prev, w, Activation::kReLU));
    prev = w;
  }
  if (!variational) specs.push_back(LayerSpec::MakeDense(prev, latent_dim, Activation::kLinear));
  return specs;
}

std::vector<LayerSpec> ArchSpec::DecoderSpecs() const {
  return DenseDecoderSpecs(input_dim, hidden_widths, latent_dim);
}

AeModel ArchSpec::Build(uint64_t seed) const {
  AeModel m(EncoderSpecs(), DecoderSpecs(), latent_dim, variational, seed);
  m.metadata["arch"] = Descriptor();
  return m;
}

json SearchSpace::ToJson() const {
  json convs = json::array();
  for (const auto& opt : conv_options) {
    json o = json::array();
    for (const auto& c : opt) o.push_back({{"out_ch", c.out_ch}, {"kernel", c.kernel}, {"stride", c.stride}});
    convs.push_back(o);
  }
  return json{{"domain", DomainName(domain)}, {"input_dim", input_dim},
              {"input_channels", input_channels}, {"widths", widths},
              {"min_depth", min_depth}, {"max_depth", max_depth},
              {"latent_min", latent_min}, {"latent_max", latent_max},
              {"conv_options", convs}, {"variational", variational}};
}

SearchSpace SearchSpace::FromJson(const json& j) {
  SearchSpace s = DefaultSearchSpace(ParseDomain(j.value("domain", std::string("spectral"))));
  try {
    s.input_dim = j.value("input_dim", s.input_dim);
    s.input_channels = j.value("input_channels", s.input_channels);
    if (j.contains("widths")) s.widths = j["widths"].get<std::vector<int>>();
    s.min_depth = j.value("min_depth", s.min_depth);
    s.max_depth = j.value("max_depth", s.max_depth);
    s.latent_min = j.value("latent_min", s.latent_min);
    s.latent_max = j.value("latent_max", s.latent_max);
    s.variational = j.value("variational", s.variational);
    if (j.contains("conv_options")) {
      s.conv_options.clear();
      for (const auto& opt : j["conv_options"]) {
        std::vector<ConvSpec> o;
        for (const auto& c : opt) o.push_back({c.at("out_ch"), c.value("kernel", 3), c.value("stride", 2)});
        s.conv_options.push_back(o);
      }
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad search space: ") + e.what());
  }
  return s;
}

SearchSpace DefaultSearchSpace(Domain domain) {
  SearchSpace s;
  s.domain = domain;
  s.input_dim = DomainDim(domain);
  s.widths = {32, 64, 128};
  if (domain == Domain::kIq) {
    s.input_channels = 2;
    s.conv_options = {{}, {{8, 5, 2}, {16, 5, 2}, {16, 3, 1}}};
  }
  return s;
}

std::vector<ArchSpec> EnumerateArchs(const SearchSpace& space) {
  std::vector<int> widths = space.widths;
  std::sort(widths.begin(), widths.end());
  widths.erase(std::unique(widths.begin(), widths.end()), widths.end());
  std::vector<ArchSpec> out;
  for (const auto& conv : space.conv_options) {
    for (int depth = space.min_depth; depth <= space.max_depth; ++depth) {
      // Non-increasing width sequences in lexicographic order of the
      // sequence read from the first layer.
      std::vector<std::vector<int>> shapes;
      std::vector<int> current;
      std::function<void(int)> extend = [&](int max_width) {
        if (static_cast<int>(current.size()) == depth) {
          shapes.push_back(current);
          return;
        }
        for (int w : widths) {
          if (w > max_width) break;
          current.push_back(w);
          extend(w);
          current.pop_back();
        }
      };
      if (depth >= 1) extend(widths.empty() ? 0 : widths.back());
      for (const auto& shape : shapes) {
        for (int z = space.latent_min; z <= space.latent_max; ++z) {
          if (z < 1 || z >= shape.back()) continue;
          ArchSpec a;
          a.input_dim = space.input_dim;
          a.input_channels = space.input_channels;
          a.hidden_widths = shape;
          a.latent_dim = z;
          a.conv_front = conv;
          a.variational = space.variational;
          if (a.input_channels > 1 && a.conv_front.empty()) a.input_channels = 1;
          out.push_back(std::move(a));
        }
      }
    }
  }
  Require(!out.empty(), ErrorCode::kEmptySpace, "search space is empty");
  return out;
}

CostProfile CountParamsOps(const ArchSpec& arch) {
  CostProfile c;
  long biases = 0;
  long layers = 0;
  auto add = [&](const LayerSpec& s) {
    c.n_params += s.NumParams();
    c.n_macs += s.Macs();
    biases += s.kind == LayerKind::kDense ? s.out : s.out_ch;
    ++layers;
  };
  const auto enc = arch.EncoderSpecs();
  for (const auto& s : enc) add(s);
  if (arch.variational) {
    const int trunk = enc.back().out_dim();
    add(LayerSpec::MakeDense(trunk, arch.latent_dim, Activation::kLinear));
    add(LayerSpec::MakeDense(trunk, arch.latent_dim, Activation::kLinear));
  }
  for (const auto& s : arch.DecoderSpecs()) add(s);
  // int8 weights, int32 biases.
  c.memory_bytes_int8 = (c.n_params - biases) + 4 * biases + kQuantMetaBytesPerLayer * layers;
  return c;
}

std::vector<ScreenResult> Screen(const std::vector<ArchSpec>& archs, const Matrix& train,
                                 const Matrix& val, const TrainBudget& budget) {
  Require(!archs.empty() && train.rows() > 0 && val.rows() > 0, ErrorCode::kInvalidArgument,
          "screening needs architectures and data");
  budget.Validate();
  std::vector<ScreenResult> results(archs.size());
  ParallelFor(static_cast<int>(archs.size()), [&](int i) {
    ScreenResult& r = results[i];
    r.arch = archs[i];
    r.cost = CountParamsOps(archs[i]);
    TrainOptions opt;
    opt.max_epochs = budget.screen_epochs;
    opt.batch_size = budget.batch_size;
    opt.learning_rate = budget.learning_rate;
    opt.kl_weight = budget.kl_weight;
    opt.seed = budget.seed;
    try {
      auto result = TrainAutoencoder(archs[i].Build(budget.seed), train, val, opt);
      r.val_mse = result.history.best_val_mse;
      r.epochs_run = static_cast<int>(result.history.epochs.size());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDiverged) throw;
      r.diverged = true;
      r.error = e.what();
    }
  });
  std::stable_sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    if (a.diverged != b.diverged) return !a.diverged;
    return !a.diverged && a.val_mse < b.val_mse;
  });
  return results;
}

std::vector<Finalist> RetrainTopK(const std::vector<ScreenResult>& ranked, int k,
                                  const Matrix& train, const Matrix& val,
                                  const TrainBudget& budget) {
  Require(k >= 1 && k <= static_cast<int>(ranked.size()), ErrorCode::kInvalidArgument,
          "k must be in [1, number of ranked architectures]");
  budget.Validate();
  std::vector<Finalist> out(k);
  ParallelFor(k, [&](int i) {
    Finalist& f = out[i];
    f.arch = ranked[i].arch;
    f.cost = ranked[i].cost;
    TrainOptions opt;
    opt.max_epochs = budget.retrain_epochs_max;
    opt.patience = budget.early_stop_patience;
    opt.batch_size = budget.batch_size;
    opt.learning_rate = budget.learning_rate;
    opt.kl_weight = budget.kl_weight;
    opt.seed = budget.seed;
    try {
      auto result = TrainAutoencoder(f.arch.Build(budget.seed), train, val, opt);
      f.val_mse = result.history.best_val_mse;
      f.history = std::move(result.history);
      f.model = std::move(result.model);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDiverged) throw;
      f.diverged = true;
    }
  });
  return out;
}

size_t SelectBest(const std::vector<Finalist>& finalists, const SelectionPolicy& policy) {
  std::vector<size_t> candidates;
  for (size_t i = 0; i < finalists.size(); ++i) {
    const auto& f = finalists[i];
    if (f.diverged) continue;
    if (policy.max_latent && f.arch.latent_dim > *policy.max_latent) continue;
    candidates.push_back(i);
  }
  Require(!candidates.empty(), ErrorCode::kInvalidArgument, "no eligible finalists");
  double best_f2 = finalists[candidates.front()].f2;
  for (size_t i : candidates) best_f2 = std::max(best_f2, finalists[i].f2);
  std::optional<size_t> pick;
  for (size_t i : candidates) {
    const auto& f = finalists[i];
    if (f.f2 < best_f2 - policy.min_f2_delta) continue;
    if (!pick) {
      pick = i;
      continue;
    }
    const auto& p = finalists[*pick];
    const auto key = [](const Finalist& x) {
      return std::make_tuple(x.arch.latent_dim, x.cost.n_params, x.arch.Descriptor());
    };
    if (key(f) < key(p)) pick = i;
  }
  return *pick;
}

void WriteSearchReport(const std::filesystem::path& path,
                       const std::vector<ScreenResult>& screened,
                       const std::vector<Finalist>& finalists) {
  std::map<std::string, const Finalist*> by_arch;
  for (const auto& f : finalists) by_arch[f.arch.Descriptor()] = &f;
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "arch,val_mse,params,macs,latent,screened,retrained,retrain_val_mse,f2,f05\n";
  char buf[256];
  for (const auto& r : screened) {
    const auto it = by_arch.find(r.arch.Descriptor());
    const Finalist* f = it == by_arch.end() ? nullptr : it->second;
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%ld,%ld,%d,1,%d,%.9g,%.6f,%.6f\n",
                  r.arch.Descriptor().c_str(), r.diverged ? -1.0 : r.val_mse, r.cost.n_params,
                  r.cost.n_macs, r.arch.latent_dim, f ? 1 : 0, f ? f->val_mse : 0.0,
                  f ? f->f2 : 0.0, f ? f->f05 : 0.0);
    out << buf;
  }
}

}  // namespace jamcomp
