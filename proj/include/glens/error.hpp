#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glens {

enum class ErrorCode {
  InvalidArgument,
  InvalidScene,
  EmptyInput,
  MalformedDistribution,
  UnparsableOutput,
  MissingKeyStep,
  InvalidProbability,
  DegenerateEmbedding,
  DegenerateImage,
  DimensionMismatch,
  OverconstrainedLayout,
  EmptyLibrary,
  BadTemplate,
  EmptyName,
  DegenerateSample,
  MissingSplit,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidScene: return "InvalidScene";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MalformedDistribution: return "MalformedDistribution";
    case ErrorCode::UnparsableOutput: return "UnparsableOutput";
    case ErrorCode::MissingKeyStep: return "MissingKeyStep";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::DegenerateEmbedding: return "DegenerateEmbedding";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OverconstrainedLayout: return "OverconstrainedLayout";
    case ErrorCode::EmptyLibrary: return "EmptyLibrary";
    case ErrorCode::BadTemplate: return "BadTemplate";
    case ErrorCode::EmptyName: return "EmptyName";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::MissingSplit: return "MissingSplit";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace glens
