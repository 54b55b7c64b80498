/* Copyright 2026 The Squiggles Authors. All Rights Reserved.

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

#include "squiggles/errors.h"

namespace squiggles {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "invalid-input";
    case ErrorCode::kDegenerateInput:
      return "degenerate-input";
    case ErrorCode::kInvalidConfig:
      return "invalid-config";
    case ErrorCode::kCorruptFile:
      return "corrupt-file";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kUndefined:
      return "undefined";
    case ErrorCode::kEmptyInput:
      return "empty-input";
    case ErrorCode::kNotConverged:
      return "not-converged";
  }
  return "unknown";
}

}  // namespace squiggles
