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

#ifndef JAMCOMP_NN_MODEL_FILE_H_
#define JAMCOMP_NN_MODEL_FILE_H_

#include <filesystem>

#include "nn/ae_model.h"

namespace jamcomp {

inline constexpr uint32_t kModelFormatVersion = 1;

// AEM1 layout: magic, u32 version, u32-length-prefixed JSON text
// {"arch": descriptor, "metadata": {...}}, then for every parameter block in
// declaration order a u32 element count and little-endian f32 values.
void SaveModel(const std::filesystem::path& path, const AeModel& model);
AeModel LoadModel(const std::filesystem::path& path);

}  // namespace jamcomp

#endif  // JAMCOMP_NN_MODEL_FILE_H_
