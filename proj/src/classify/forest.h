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

#ifndef JAMCOMP_CLASSIFY_FOREST_H_
#define JAMCOMP_CLASSIFY_FOREST_H_

#include <cstdint>
#include <span>
#include <vector>

#include "common/matrix.h"
#include "json.hpp"

namespace jamcomp {

struct ForestConfig {
  int n_trees = 200;
  int max_depth = -1;          // -1: unlimited
  int min_leaf = 1;
  int features_per_split = 0;  // 0: ceil(sqrt(d))
  bool bootstrap = true;
  uint64_t seed = 0;

  void Validate() const;
  nlohmann::json ToJson() const;
  static ForestConfig FromJson(const nlohmann::json& j);
};

// Binary decision tree over dense features. A sample goes left when
// x[feature] <= threshold; the threshold is the largest training value seen
// on the left side, so any strictly increasing per-feature transform applied
// to both training and test data leaves predictions unchanged.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
  };

  // Grows a tree on the given rows (duplicates allowed, e.g. a bootstrap).
  static DecisionTree Grow(const Matrix& x, std::span<const int> labels,
                           std::span<const int> rows, int n_classes, const ForestConfig& cfg,
                           uint64_t seed);

  int Predict(std::span<const double> x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;

 private:
  std::vector<Node> nodes_;
};

class RandomForest {
 public:
  // Labels must lie in [0, n_classes). Data with a single class present
  // yields a constant classifier and sets degenerate().
  static RandomForest Train(const Matrix& x, std::span<const int> labels, int n_classes,
                            const ForestConfig& cfg);

  // Majority vote over trees; ties go to the smallest class index.
  int Predict(std::span<const double> x) const;
  std::vector<int> PredictBatch(const Matrix& x) const;
  std::vector<int> Votes(std::span<const double> x) const;

  int n_features() const { return n_features_; }
  int n_classes() const { return n_classes_; }
  bool degenerate() const { return degenerate_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
  int n_features_ = 0;
  int n_classes_ = 0;
  bool degenerate_ = false;
  int constant_label_ = 0;
};

}  // namespace jamcomp

#endif  // JAMCOMP_CLASSIFY_FOREST_H_
