// Copyright 2026 The personaact Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace personaact {

// Every failure surfaced by the library carries one of these codes. The
// module prefix in code_name() is what the CLI and HTTP service report.
enum class ErrorCode {
  // trace
  kFileNotFound,
  kSchemaMismatch,
  kEmptyDataset,
  kInvalidRatios,
  // analyzer
  kUnknownPersona,
  kNoRecordsInSplit,
  // interview
  kEmptyOutline,
  kInvalidOutline,
  kSectionExhausted,
  kSessionNotActive,
  kNoPendingQuestion,
  kEmptyAnswer,
  kSessionNotFinalized,
  kSessionNotFound,
  // policy
  kPersonaMismatch,
  kNonPositiveDuration,
  kInvalidQuantile,
  kEndpointUnreachable,
  // recsim
  kEmptyCatalog,
  kInvalidCatalog,
  kInvalidPlatformConfig,
  kFeedbackMismatch,
  // audit
  kStepsBelowWindow,
  kUnnormalizedInput,
  kEmptyExposureList,
  kAdapterFailure,
  // metrics
  kLengthMismatch,
  kEmptyInput,
  kNonPositiveTruth,
  // cli / io
  kConfigInvalid,
  kIoError,
  kParseError,
};

inline std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound: return "trace.FileNotFound";
    case ErrorCode::kSchemaMismatch: return "trace.SchemaMismatch";
    case ErrorCode::kEmptyDataset: return "trace.EmptyDataset";
    case ErrorCode::kInvalidRatios: return "trace.InvalidRatios";
    case ErrorCode::kUnknownPersona: return "analyzer.UnknownPersona";
    case ErrorCode::kNoRecordsInSplit: return "analyzer.NoRecordsInSplit";
    case ErrorCode::kEmptyOutline: return "interview.EmptyOutline";
    case ErrorCode::kInvalidOutline: return "interview.InvalidOutline";
    case ErrorCode::kSectionExhausted: return "interview.SectionExhausted";
    case ErrorCode::kSessionNotActive: return "interview.SessionNotActive";
    case ErrorCode::kNoPendingQuestion: return "interview.NoPendingQuestion";
    case ErrorCode::kEmptyAnswer: return "interview.EmptyAnswer";
    case ErrorCode::kSessionNotFinalized: return "interview.SessionNotFinalized";
    case ErrorCode::kSessionNotFound: return "interview.SessionNotFound";
    case ErrorCode::kPersonaMismatch: return "policy.PersonaMismatch";
    case ErrorCode::kNonPositiveDuration: return "policy.NonPositiveDuration";
    case ErrorCode::kInvalidQuantile: return "policy.InvalidQuantile";
    case ErrorCode::kEndpointUnreachable: return "policy.EndpointUnreachable";
    case ErrorCode::kEmptyCatalog: return "recsim.EmptyCatalog";
    case ErrorCode::kInvalidCatalog: return "recsim.InvalidCatalog";
    case ErrorCode::kInvalidPlatformConfig: return "recsim.InvalidPlatformConfig";
    case ErrorCode::kFeedbackMismatch: return "recsim.FeedbackMismatch";
    case ErrorCode::kStepsBelowWindow: return "audit.StepsBelowWindow";
    case ErrorCode::kUnnormalizedInput: return "audit.UnnormalizedInput";
    case ErrorCode::kEmptyExposureList: return "audit.EmptyExposureList";
    case ErrorCode::kAdapterFailure: return "audit.AdapterFailure";
    case ErrorCode::kLengthMismatch: return "metrics.LengthMismatch";
    case ErrorCode::kEmptyInput: return "metrics.EmptyInput";
    case ErrorCode::kNonPositiveTruth: return "metrics.NonPositiveTruth";
    case ErrorCode::kConfigInvalid: return "cli.ConfigInvalid";
    case ErrorCode::kIoError: return "io.IoError";
    case ErrorCode::kParseError: return "io.ParseError";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return personaact::code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace personaact
