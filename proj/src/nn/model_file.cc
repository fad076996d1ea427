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

#include "nn/model_file.h"

#include <fstream>

#include "common/binary_io.h"
#include "common/error.h"

namespace jamcomp {

namespace {
constexpr char kModelMagic[5] = "AEM1";
}  // namespace

void SaveModel(const std::filesystem::path& path, const AeModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  WriteMagic(out, kModelMagic);
  WritePod<uint32_t>(out, kModelFormatVersion);
  const nlohmann::json header{{"arch", model.Descriptor()}, {"metadata", model.metadata}};
  WriteString(out, header.dump());
  for (const Param* p : model.Params()) {
    WritePod<uint32_t>(out, static_cast<uint32_t>(p->value.size()));
    for (double v : p->value) WritePod<float>(out, static_cast<float>(v));
  }
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

AeModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  ExpectMagic(in, kModelMagic);
  const uint32_t version = ReadPod<uint32_t>(in);
  Require(version == kModelFormatVersion, ErrorCode::kFormat,
          "unsupported model format version " + std::to_string(version));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(ReadString(in));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad model header: ") + e.what());
  }
  AeModel model = AeModel::FromDescriptor(header.at("arch"));
  model.metadata = header.value("metadata", nlohmann::json::object());
  for (Param* p : model.Params()) {
    const uint32_t n = ReadPod<uint32_t>(in);
    Require(n == p->value.size(), ErrorCode::kFormat, "parameter blob size mismatch");
    for (double& v : p->value) v = ReadPod<float>(in);
  }
  return model;
}

}  // namespace jamcomp
