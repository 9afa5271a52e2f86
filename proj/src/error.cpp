#include "atom/error.hpp"

namespace atom {

const char* toString(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::InvalidTopology: return "invalid topology";
    case ErrorCode::ParseError: return "parse error";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::MalformedPmf: return "malformed pmf";
    case ErrorCode::EndOfStream: return "end of stream";
    case ErrorCode::StreamTooShort: return "stream too short";
    case ErrorCode::CoderFinished: return "coder already finished";
    case ErrorCode::ChecksumMismatch: return "checksum mismatch";
    case ErrorCode::CorruptContainer: return "corrupt container";
    case ErrorCode::ScenarioMismatch: return "scenario mismatch";
    case ErrorCode::TrainingDiverged: return "training diverged";
    case ErrorCode::IoError: return "i/o error";
  }
  return "unknown error";
}

}  // namespace atom
