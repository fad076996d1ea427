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

#include "nn/train.h"

#include <algorithm>
#include <cmath>

#include "common/error.h"
#include "common/rng.h"
#include "nn/adam.h"
#include "nn/losses.h"

namespace jamcomp {

using nlohmann::json;

void TrainBudget::Validate() const {
  Require(screen_epochs >= 1 && retrain_epochs_max >= screen_epochs, ErrorCode::kInvalidSpec,
          "budget needs retrain_epochs_max >= screen_epochs >= 1");
  Require(batch_size >= 1 && early_stop_patience >= 0, ErrorCode::kInvalidSpec,
          "batch size must be positive and patience non-negative");
  Require(val_fraction > 0.0 && val_fraction < 1.0, ErrorCode::kInvalidSpec,
          "validation fraction must be in (0, 1)");
}

json TrainBudget::ToJson() const {
  return json{{"screen_epochs", screen_epochs},
              {"retrain_epochs_max", retrain_epochs_max},
              {"early_stop_patience", early_stop_patience},
              {"batch_size", batch_size},
              {"seed", seed},
              {"learning_rate", learning_rate},
              {"val_fraction", val_fraction},
              {"kl_weight", kl_weight}};
}

TrainBudget TrainBudget::FromJson(const json& j) {
  TrainBudget b;
  b.screen_epochs = j.value("screen_epochs", b.screen_epochs);
  b.retrain_epochs_max = j.value("retrain_epochs_max", b.retrain_epochs_max);
  b.early_stop_patience = j.value("early_stop_patience", b.early_stop_patience);
  b.batch_size = j.value("batch_size", b.batch_size);
  b.seed = j.value("seed", b.seed);
  b.learning_rate = j.value("learning_rate", b.learning_rate);
  b.val_fraction = j.value("val_fraction", b.val_fraction);
  b.kl_weight = j.value("kl_weight", b.kl_weight);
  b.Validate();
  return b;
}

void SplitValidation(int n_rows, double val_fraction, uint64_t seed, std::vector<int>* train,
                     std::vector<int>* val) {
  Rng rng(seed);
  std::vector<int> perm = rng.Permutation(n_rows);
  const int n_val = std::clamp(static_cast<int>(std::lround(n_rows * val_fraction)), 1,
                               std::max(1, n_rows - 1));
  val->assign(perm.begin(), perm.begin() + n_val);
  train->assign(perm.begin() + n_val, perm.end());
  std::sort(val->begin(), val->end());
  std::sort(train->begin(), train->end());
}

TrainResult TrainAutoencoder(AeModel model, const Matrix& train, const Matrix& val,
                             const TrainOptions& options) {
  Require(train.rows() > 0 && val.rows() > 0, ErrorCode::kInvalidArgument,
          "training and validation sets must be nonempty");
  Require(options.max_epochs >= 1 && options.batch_size >= 1, ErrorCode::kInvalidSpec,
          "need at least one epoch and a positive batch size");
  Adam adam(AdamConfig{options.learning_rate});
  Rng rng(options.seed);
  TrainHistory history;
  std::optional<AeModel> best;
  int since_best = 0;
  const int n = train.rows();
  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    const std::vector<int> order = rng.Permutation(n);
    double loss_sum = 0.0;
    for (int start = 0; start < n; start += options.batch_size) {
      const int end = std::min(n, start + options.batch_size);
      const std::span<const int> idx(order.data() + start, static_cast<size_t>(end - start));
      const Matrix batch = train.SelectRows(idx);
      model.ZeroGrad();
      const auto parts = model.ForwardBackward(batch, rng.NextU64(), options.kl_weight);
      if (!std::isfinite(parts.total)) {
        Fail(ErrorCode::kDiverged, "training diverged in epoch " + std::to_string(epoch) +
                                       "; last finite epoch " + std::to_string(epoch - 1));
      }
      loss_sum += parts.total * (end - start);
      adam.Step(model.Params());
    }
    const double val_mse = MseLoss(val, model.Infer(val).reconstruction);
    if (!std::isfinite(val_mse)) {
      Fail(ErrorCode::kDiverged, "training diverged in epoch " + std::to_string(epoch) +
                                     "; last finite epoch " + std::to_string(epoch - 1));
    }
    history.epochs.push_back({epoch, loss_sum / n, val_mse});
    if (!best || val_mse < history.best_val_mse) {
      best = model;
      history.best_epoch = epoch;
      history.best_val_mse = val_mse;
      since_best = 0;
    } else {
      ++since_best;
      if (options.patience && since_best > *options.patience) {
        history.early_stopped = true;
        break;
      }
    }
  }
  best->RoundToFloat();
  return {std::move(*best), std::move(history)};
}

}  // namespace jamcomp
