#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace atom {

enum class ErrorCode : std::uint8_t {
  InvalidArgument,
  InvalidTopology,
  ParseError,
  ShapeMismatch,
  MalformedPmf,
  EndOfStream,
  StreamTooShort,
  CoderFinished,
  ChecksumMismatch,
  CorruptContainer,
  ScenarioMismatch,
  TrainingDiverged,
  IoError,
};

const char* toString(ErrorCode code) noexcept;

/// Every failure in the library surfaces as an AtomError. The code is stable
/// and maps to the CLI exit status; the message carries location details.
class AtomError : public std::runtime_error {
 public:
  AtomError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(toString(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace atom
