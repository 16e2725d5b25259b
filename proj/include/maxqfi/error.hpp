// Copyright 2026 The maxqfi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace maxqfi {

enum class ErrorCode {
  NotHermitian,
  NoConvergence,
  NotPSD,
  DimMismatch,
  RankMismatch,
  NotCompletelyPositive,  // Kraus completeness violated
  ParamOutOfRange,
  SizeBudgetExceeded,
  NotAState,
  NonTracelessDerivative,
  SingularMatrix,
  SolverFailure,
  NotUnitary,
  BranchAmbiguity,
  SpreadExceedsPi,
  NotUnitaryFamily,
  OriginSingularity,
  StepTooLarge,
  NegativeEigenvalue,
  EtaOne,
  MissingPoints,
  SchemaError,
  UnsupportedChannel,
  InvalidArgument,
  BuiltinSelected,
  SingularQFIM,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::NotCompletelyPositive: return "NotCompletelyPositive";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::SizeBudgetExceeded: return "SizeBudgetExceeded";
    case ErrorCode::NotAState: return "NotAState";
    case ErrorCode::NonTracelessDerivative: return "NonTracelessDerivative";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorCode::SpreadExceedsPi: return "SpreadExceedsPi";
    case ErrorCode::NotUnitaryFamily: return "NotUnitaryFamily";
    case ErrorCode::OriginSingularity: return "OriginSingularity";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::EtaOne: return "EtaOne";
    case ErrorCode::MissingPoints: return "MissingPoints";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnsupportedChannel: return "UnsupportedChannel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BuiltinSelected: return "BuiltinSelected";
    case ErrorCode::SingularQFIM: return "SingularQFIM";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// that front ends can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace maxqfi
