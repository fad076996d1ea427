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

#include "classify/metrics.h"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "common/error.h"

namespace jamcomp {

using nlohmann::json;

namespace {

std::string Name(const std::vector<std::string>& names, int i) {
  return i < static_cast<int>(names.size()) ? names[i] : std::to_string(i);
}

std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(int n_classes)
    : n_(n_classes), counts_(static_cast<size_t>(n_classes) * n_classes, 0) {
  Require(n_classes >= 0, ErrorCode::kInvalidArgument, "negative class count");
}

ConfusionMatrix ConfusionMatrix::FromLabels(std::span<const int> truth, std::span<const int> pred,
                                            int n_classes) {
  Require(truth.size() == pred.size(), ErrorCode::kShape, "truth and prediction lengths differ");
  ConfusionMatrix cm(n_classes);
  for (size_t i = 0; i < truth.size(); ++i) cm.Add(truth[i], pred[i]);
  return cm;
}

void ConfusionMatrix::Add(int truth, int pred, long count) {
  Require(truth >= 0 && truth < n_ && pred >= 0 && pred < n_, ErrorCode::kInvalidArgument,
          "label out of range for confusion matrix");
  counts_[static_cast<size_t>(truth) * n_ + pred] += count;
}

long ConfusionMatrix::at(int truth, int pred) const {
  return counts_[static_cast<size_t>(truth) * n_ + pred];
}

long ConfusionMatrix::Total() const {
  long s = 0;
  for (long c : counts_) s += c;
  return s;
}

long ConfusionMatrix::RowSum(int c) const {
  long s = 0;
  for (int j = 0; j < n_; ++j) s += at(c, j);
  return s;
}

long ConfusionMatrix::ColSum(int c) const {
  long s = 0;
  for (int i = 0; i < n_; ++i) s += at(i, c);
  return s;
}

json ConfusionMatrix::ToJson() const {
  json rows = json::array();
  for (int i = 0; i < n_; ++i) {
    json r = json::array();
    for (int j = 0; j < n_; ++j) r.push_back(at(i, j));
    rows.push_back(r);
  }
  return rows;
}

ConfusionMatrix ConfusionMatrix::FromJson(const json& j) {
  ConfusionMatrix cm(static_cast<int>(j.size()));
  for (int i = 0; i < cm.n_; ++i) {
    Require(j[i].size() == j.size(), ErrorCode::kFormat, "confusion matrix must be square");
    for (int k = 0; k < cm.n_; ++k) cm.Add(i, k, j[i][k].get<long>());
  }
  return cm;
}

double FBetaFromPr(double precision, double recall, double beta) {
  Require(beta > 0.0, ErrorCode::kInvalidArgument, "beta must be positive");
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  return denom > 0.0 ? (1.0 + b2) * precision * recall / denom : 0.0;
}

FBetaScore FBeta(const ConfusionMatrix& cm, double beta) {
  FBetaScore s;
  s.beta = beta;
  double sum = 0.0;
  for (int c = 0; c < cm.n_classes(); ++c) {
    const long support = cm.RowSum(c);
    if (support == 0) continue;
    const long tp = cm.at(c, c);
    const long predicted = cm.ColSum(c);
    ClassScore cs;
    cs.label = c;
    cs.support = support;
    cs.precision = predicted > 0 ? static_cast<double>(tp) / predicted : 0.0;
    cs.recall = static_cast<double>(tp) / support;
    cs.fbeta = FBetaFromPr(cs.precision, cs.recall, beta);
    sum += cs.fbeta;
    s.per_class.push_back(cs);
  }
  s.macro = s.per_class.empty() ? 0.0 : sum / static_cast<double>(s.per_class.size());
  return s;
}

void WriteConfusionCsv(const std::filesystem::path& path, const ConfusionMatrix& cm,
                       const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "true/pred";
  for (int j = 0; j < cm.n_classes(); ++j) out << ',' << Name(names, j);
  out << '\n';
  for (int i = 0; i < cm.n_classes(); ++i) {
    out << Name(names, i);
    for (int j = 0; j < cm.n_classes(); ++j) out << ',' << cm.at(i, j);
    out << '\n';
  }
}

void WriteConfusionSvg(const std::filesystem::path& path, const ConfusionMatrix& cm,
                       const std::vector<std::string>& names, const std::string& title) {
  constexpr int kCell = 56, kLeft = 120, kTop = 60;
  const int n = cm.n_classes();
  const int width = kLeft + n * kCell + 20, height = kTop + n * kCell + 100;
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << XmlEscape(title) << "</text>\n";
  char buf[512];
  for (int i = 0; i < n; ++i) {
    const long row = std::max(cm.RowSum(i), 1L);
    for (int j = 0; j < n; ++j) {
      const double frac = static_cast<double>(cm.at(i, j)) / static_cast<double>(row);
      const int shade = 255 - static_cast<int>(frac * 200.0);
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"rgb(%d,%d,255)\" "
                    "stroke=\"#888\"/>\n<text x=\"%d\" y=\"%d\" text-anchor=\"middle\" "
                    "fill=\"%s\">%ld</text>\n",
                    kLeft + j * kCell, kTop + i * kCell, kCell, kCell, shade, shade,
                    kLeft + j * kCell + kCell / 2, kTop + i * kCell + kCell / 2 + 4,
                    frac > 0.6 ? "white" : "black", cm.at(i, j));
      out << buf;
    }
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + i * kCell + kCell / 2 + 4
        << "\" text-anchor=\"end\">" << XmlEscape(Name(names, i)) << "</text>\n";
    out << "<text transform=\"translate(" << kLeft + i * kCell + kCell / 2 << ","
        << kTop + n * kCell + 10 << ") rotate(45)\">" << XmlEscape(Name(names, i)) << "</text>\n";
  }
  out << "<text x=\"14\" y=\"" << kTop + n * kCell / 2 << "\" transform=\"rotate(-90 14,"
      << kTop + n * kCell / 2 << ")\" text-anchor=\"middle\">true</text>\n";
  out << "<text x=\"" << kLeft + n * kCell / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\">predicted</text>\n</svg>\n";
}

}  // namespace jamcomp
