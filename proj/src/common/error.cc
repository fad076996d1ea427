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

#include "common/error.h"

namespace jamcomp {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kUnsupportedWaveform: return "unsupported-waveform";
    case ErrorCode::kInvalidChannel: return "invalid-channel";
    case ErrorCode::kInvalidLength: return "invalid-length";
    case ErrorCode::kInsufficientSamples: return "insufficient-samples";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kDiverged: return "training-diverged";
    case ErrorCode::kEmptySpace: return "empty-space";
    case ErrorCode::kMissingStats: return "missing-stats";
    case ErrorCode::kLeakage: return "leakage";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kChecksum: return "checksum-mismatch";
    case ErrorCode::kNoArtifacts: return "no-artifacts";
  }
  return "unknown";
}

}  // namespace jamcomp
