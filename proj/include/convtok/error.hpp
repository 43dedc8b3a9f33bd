#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace convtok {

enum class ErrorCode {
  kMalformedRecord,
  kInvalidEncoding,
  kEmptyCorpus,
  kIdOutOfRange,
  kInvalidByteSequence,
  kFormatVersionMismatch,
  kIntegrityError,
  kConfigError,
  kCorpusTooLarge,
  kNoWords,
  kEmptyText,
  kIoError,
};

const char* to_string(ErrorCode code);

// Every failure the library reports carries a machine-readable code; load
// errors additionally carry the 1-based line number of the offending input.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace convtok
