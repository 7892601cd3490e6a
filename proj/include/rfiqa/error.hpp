//
// Copyright (C) 2026 The rfiqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rfiqa {

enum class ErrorCode {
  // feature store
  DuplicateRecordId,
  DimensionMismatch,
  OrphanDistortedRecord,
  MissingMos,
  NonFiniteValue,
  InvalidManifest,
  IoError,
  BadMagic,
  UnsupportedVersion,
  CorruptManifest,
  InvalidFactor,
  EmptySplit,
  // distance / retrieval / prediction
  LengthMismatch,
  NoEligibleGroups,
  UnknownGroup,
  UnknownRecord,
  WrongMode,
  InvalidConfig,
  EmptyInstanceList,
  // evaluation
  DegenerateInput,
  FitDiverged,
  // consistency analysis
  InsufficientGroups,
  InsufficientAlignment,
  MissingAlignment,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the library. The code is stable and is what the
/// CLI prints on stderr; the message carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rfiqa
