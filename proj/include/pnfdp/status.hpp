// Copyright 2026 The pnfdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PNFDP_STATUS_HPP_
#define PNFDP_STATUS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace pnfdp {

// Error categories surfaced to callers and to the CLI's error JSON.
enum class ErrorCode {
  kInvalidArgument,
  kValidation,  // input well-formed but violates a modelling hypothesis
  kFormat,      // malformed file or matrix
  kNumeric,     // grid floor, bracket failure, non-convergence
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kValidation:
      return "validation_error";
    case ErrorCode::kFormat:
      return "format_error";
    case ErrorCode::kNumeric:
      return "numeric_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace pnfdp

#endif  // PNFDP_STATUS_HPP_
