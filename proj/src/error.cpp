#include "convtok/error.hpp"

namespace convtok {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kInvalidEncoding: return "InvalidEncoding";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kIdOutOfRange: return "IdOutOfRange";
    case ErrorCode::kInvalidByteSequence: return "InvalidByteSequence";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kIntegrityError: return "IntegrityError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kCorpusTooLarge: return "CorpusTooLarge";
    case ErrorCode::kNoWords: return "NoWords";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(message), code_(code), line_(line) {}

}  // namespace convtok
