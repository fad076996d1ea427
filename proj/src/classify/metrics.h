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

#ifndef JAMCOMP_CLASSIFY_METRICS_H_
#define JAMCOMP_CLASSIFY_METRICS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace jamcomp {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int n_classes = 0);
  static ConfusionMatrix FromLabels(std::span<const int> truth, std::span<const int> pred,
                                    int n_classes);

  void Add(int truth, int pred, long count = 1);
  long at(int truth, int pred) const;
  int n_classes() const { return n_; }
  long Total() const;
  long RowSum(int c) const;
  long ColSum(int c) const;

  nlohmann::json ToJson() const;
  static ConfusionMatrix FromJson(const nlohmann::json& j);

 private:
  int n_ = 0;
  std::vector<long> counts_;
};

struct ClassScore {
  int label = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fbeta = 0.0;
  long support = 0;
};

struct FBetaScore {
  double beta = 1.0;
  std::vector<ClassScore> per_class;  // classes present in the truth only
  double macro = 0.0;
};

// (1 + b^2) P R / (b^2 P + R), 0 when P = R = 0.
double FBetaFromPr(double precision, double recall, double beta);

// One-vs-rest scores, macro-averaged over classes present in the truth.
FBetaScore FBeta(const ConfusionMatrix& cm, double beta);

void WriteConfusionCsv(const std::filesystem::path& path, const ConfusionMatrix& cm,
                       const std::vector<std::string>& names);
void WriteConfusionSvg(const std::filesystem::path& path, const ConfusionMatrix& cm,
                       const std::vector<std::string>& names, const std::string& title);

}  // namespace jamcomp

#endif  // JAMCOMP_CLASSIFY_METRICS_H_
