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

#ifndef JAMCOMP_NN_TRAIN_H_
#define JAMCOMP_NN_TRAIN_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "common/matrix.h"
#include "json.hpp"
#include "nn/ae_model.h"

namespace jamcomp {

struct TrainBudget {
  int screen_epochs = 90;
  int retrain_epochs_max = 700;
  int early_stop_patience = 20;
  int batch_size = 32;
  uint64_t seed = 0;
  double learning_rate = 1e-3;
  double val_fraction = 0.15;
  double kl_weight = 1.0;

  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainBudget FromJson(const nlohmann::json& j);
};

struct TrainOptions {
  int max_epochs = 90;
  // Stop once the validation MSE has failed to improve for more than this
  // many consecutive epochs. Unset: run all epochs.
  std::optional<int> patience;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double kl_weight = 1.0;
  uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_mse = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_mse = 0.0;
  bool early_stopped = false;
};

struct TrainResult {
  AeModel model;  // best-validation checkpoint, rounded to f32
  TrainHistory history;
};

// Mini-batch Adam on the model's objective. Batches are drawn from a
// per-epoch permutation seeded from options.seed. Throws training-diverged
// (message carries the last finite epoch) on a non-finite loss.
TrainResult TrainAutoencoder(AeModel model, const Matrix& train, const Matrix& val,
                             const TrainOptions& options);

// Deterministic train/validation split of row indices.
void SplitValidation(int n_rows, double val_fraction, uint64_t seed, std::vector<int>* train,
                     std::vector<int>* val);

}  // namespace jamcomp

#endif  // JAMCOMP_NN_TRAIN_H_
