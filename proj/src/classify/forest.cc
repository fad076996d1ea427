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

#include "classify/forest.h"

#include <algorithm>
#include <cmath>

#include "common/error.h"
#include "common/parallel.h"
#include "common/rng.h"

namespace jamcomp {

using nlohmann::json;

namespace {

double Gini(std::span<const long> counts, long n) {
  if (n == 0) return 0.0;
  double s = 0.0;
  for (long c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    s += p * p;
  }
  return 1.0 - s;
}

int Majority(std::span<const long> counts) {
  int best = 0;
  for (size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = static_cast<int>(c);
  }
  return best;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity
  size_t n_left = 0;
};

class Grower {
 public:
  Grower(const Matrix& x, std::span<const int> labels, int n_classes, const ForestConfig& cfg,
         uint64_t seed)
      : x_(x), labels_(labels), n_classes_(n_classes), cfg_(cfg), rng_(seed) {
    per_split_ = cfg.features_per_split > 0
                     ? std::min(cfg.features_per_split, x.cols())
                     : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
  }

  int Build(std::vector<int>& rows, int depth, std::vector<DecisionTree::Node>& nodes) {
    std::vector<long> counts(n_classes_, 0);
    for (int r : rows) ++counts[labels_[r]];
    const long n = static_cast<long>(rows.size());
    const int index = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[index].label = Majority(counts);
    const bool pure = *std::max_element(counts.begin(), counts.end()) == n;
    if (pure || n < 2L * cfg_.min_leaf || (cfg_.max_depth >= 0 && depth >= cfg_.max_depth)) {
      return index;
    }
    const Split split = FindSplit(rows, counts);
    if (split.feature < 0) return index;
    std::vector<int> left, right;
    for (int r : rows) (x_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    nodes[index].feature = split.feature;
    nodes[index].threshold = split.threshold;
    const int l = Build(left, depth + 1, nodes);
    const int r = Build(right, depth + 1, nodes);
    nodes[index].left = l;
    nodes[index].right = r;
    return index;
  }

 private:
  // Evaluates a random subset of features; when none of them admits a valid
  // split, keeps drawing from the remaining features.
  Split FindSplit(const std::vector<int>& rows, const std::vector<long>& parent) {
    const auto order = rng_.Permutation(x_.cols());
    const long n = static_cast<long>(rows.size());
    Split best;
    double best_impurity = Gini(parent, n) + 1e-12;
    std::vector<int> sorted(rows);
    std::vector<long> left(n_classes_), right(n_classes_);
    int evaluated = 0;
    for (int f : order) {
      if (evaluated >= per_split_ && best.feature >= 0) break;
      ++evaluated;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](int a, int b) { return x_(a, f) < x_(b, f); });
      std::fill(left.begin(), left.end(), 0);
      right = parent;
      for (long i = 0; i + 1 < n; ++i) {
        const int lab = labels_[sorted[i]];
        ++left[lab];
        --right[lab];
        const double v = x_(sorted[i], f);
        if (v == x_(sorted[i + 1], f)) continue;
        const long nl = i + 1, nr = n - nl;
        if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
        const double imp = (static_cast<double>(nl) * Gini(left, nl) +
                            static_cast<double>(nr) * Gini(right, nr)) /
                           static_cast<double>(n);
        if (imp < best_impurity) {
          best_impurity = imp;
          best = {f, v, imp, static_cast<size_t>(nl)};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const int> labels_;
  int n_classes_;
  const ForestConfig& cfg_;
  Rng rng_;
  int per_split_ = 1;
};

}  // namespace

void ForestConfig::Validate() const {
  Require(n_trees >= 1, ErrorCode::kInvalidSpec, "n_trees must be >= 1");
  Require(min_leaf >= 1, ErrorCode::kInvalidSpec, "min_leaf must be >= 1");
  Require(max_depth >= -1, ErrorCode::kInvalidSpec, "max_depth must be -1 or >= 0");
  Require(features_per_split >= 0, ErrorCode::kInvalidSpec, "features_per_split must be >= 0");
}

json ForestConfig::ToJson() const {
  return json{{"n_trees", n_trees},   {"max_depth", max_depth},
              {"min_leaf", min_leaf}, {"features_per_split", features_per_split},
              {"bootstrap", bootstrap}, {"seed", seed}};
}

ForestConfig ForestConfig::FromJson(const json& j) {
  ForestConfig c;
  c.n_trees = j.value("n_trees", c.n_trees);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.min_leaf = j.value("min_leaf", c.min_leaf);
  c.features_per_split = j.value("features_per_split", c.features_per_split);
  c.bootstrap = j.value("bootstrap", c.bootstrap);
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

DecisionTree DecisionTree::Grow(const Matrix& x, std::span<const int> labels,
                                std::span<const int> rows, int n_classes,
                                const ForestConfig& cfg, uint64_t seed) {
  Require(!rows.empty(), ErrorCode::kInvalidArgument, "cannot grow a tree on no rows");
  for (int r : rows) {
    Require(r >= 0 && r < x.rows() && labels[r] >= 0 && labels[r] < n_classes,
            ErrorCode::kInvalidArgument, "row index or label out of range");
  }
  DecisionTree tree;
  std::vector<int> work(rows.begin(), rows.end());
  Grower(x, labels, n_classes, cfg, seed).Build(work, 0, tree.nodes_);
  return tree;
}

int DecisionTree::Predict(std::span<const double> x) const {
  int i = 0;
  while (nodes_[i].feature >= 0) {
    i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  }
  return nodes_[i].label;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].feature >= 0) {
      d[nodes_[i].left] = d[nodes_[i].right] = d[i] + 1;
    }
    best = std::max(best, d[i]);
  }
  return best;
}

RandomForest RandomForest::Train(const Matrix& x, std::span<const int> labels, int n_classes,
                                 const ForestConfig& cfg) {
  cfg.Validate();
  Require(x.rows() > 0 && static_cast<int>(labels.size()) == x.rows(), ErrorCode::kShape,
          "labels must match the number of rows");
  Require(n_classes >= 1, ErrorCode::kInvalidArgument, "need at least one class");
  RandomForest f;
  f.n_features_ = x.cols();
  f.n_classes_ = n_classes;
  std::vector<long> counts(n_classes, 0);
  for (int l : labels) {
    Require(l >= 0 && l < n_classes, ErrorCode::kInvalidArgument, "label out of range");
    ++counts[l];
  }
  if (std::count_if(counts.begin(), counts.end(), [](long c) { return c > 0; }) < 2) {
    f.degenerate_ = true;
    f.constant_label_ = Majority(counts);
    return f;
  }
  f.trees_.resize(cfg.n_trees);
  ParallelFor(cfg.n_trees, [&](int t) {
    const uint64_t seed = MixSeed(cfg.seed, static_cast<uint64_t>(t));
    std::vector<int> rows(x.rows());
    if (cfg.bootstrap) {
      Rng rng(MixSeed(seed, 1));
      for (int& r : rows) r = static_cast<int>(rng.UniformInt(x.rows()));
    } else {
      for (int i = 0; i < x.rows(); ++i) rows[i] = i;
    }
    f.trees_[t] = DecisionTree::Grow(x, labels, rows, n_classes, cfg, MixSeed(seed, 2));
  });
  return f;
}

std::vector<int> RandomForest::Votes(std::span<const double> x) const {
  Require(static_cast<int>(x.size()) == n_features_, ErrorCode::kShape,
          "feature dimension does not match the forest");
  std::vector<int> votes(n_classes_, 0);
  if (degenerate_) {
    votes[constant_label_] = 1;
    return votes;
  }
  for (const auto& t : trees_) ++votes[t.Predict(x)];
  return votes;
}

int RandomForest::Predict(std::span<const double> x) const {
  const auto votes = Votes(x);
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<int> RandomForest::PredictBatch(const Matrix& x) const {
  Require(x.cols() == n_features_, ErrorCode::kShape,
          "feature dimension does not match the forest");
  std::vector<int> out(x.rows());
  ParallelFor(x.rows(), [&](int i) { out[i] = Predict(x.row(i)); });
  return out;
}

}  // namespace jamcomp
