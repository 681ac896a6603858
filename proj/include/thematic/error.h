#pragma once

#include <stdexcept>
#include <string>

namespace thematic {

enum class ErrorCode {
  kInvalidArgument,  // bad parameter or configuration value
  kDataError,        // malformed or inconsistent input data
  kIoError,          // file could not be read or written
  kNotFound,         // unknown id
  kConflict,         // operation not allowed in the current state
  kInternal,
};

/// Stable machine-readable name, used in API error bodies.
const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code), reason_(error_code_name(code)) {}
  /// `reason` refines the code for API clients, e.g. "duplicate_doc_id".
  Error(ErrorCode code, std::string reason, const std::string& message)
      : std::runtime_error(message), code_(code), reason_(std::move(reason)) {}

  ErrorCode code() const { return code_; }
  const std::string& reason() const { return reason_; }

 private:
  ErrorCode code_;
  std::string reason_;
};

}  // namespace thematic
