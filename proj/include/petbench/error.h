// Copyright 2026 The petbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef PETBENCH_ERROR_H_
#define PETBENCH_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace petbench {

enum class ErrorCode {
  kRaggedRow,
  kParseError,
  kMissingTarget,
  kUnknownColumn,
  kInvalidSchema,
  kInvalidWidths,
  kMissingHierarchy,
  kBudgetExceeded,
  kInvalidK,
  kDegenerateTable,
  kSchemaMismatch,
  kLengthMismatch,
  kEmptyInput,
  kDimensionMismatch,
  kNonBinaryLabels,
  kUnsupportedPlatform,
  kPermissionDenied,
  kSessionOverlap,
  kPrecondition,
  kEmptySample,
  kTiesInExact,
  kDigestMismatch,
  kNetworkError,
  kMissingBenchmark,
  kIoError,
  kEmptyLog,
  kConfig,
};

std::string_view ErrorCodeName(ErrorCode code);

// All failures surfaced by the library carry one of the codes above; the
// message is meant for humans and may change.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace petbench

#endif  // PETBENCH_ERROR_H_
