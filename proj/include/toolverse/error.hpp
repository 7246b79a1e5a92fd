#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toolverse {

// Stable error taxonomy. The numeric values are mirrored by tv_status in the
// C API header, so append only.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kSchemaViolation = 2,
  kDuplicateName = 3,
  kUnknownTool = 4,
  kMissingArgument = 5,
  kTypeMismatch = 6,
  kUnboundPlaceholder = 7,
  kTransport = 8,
  kParse = 9,
  kContextOverflow = 10,
  kFingerprintMismatch = 11,
  kIo = 12,
  kPrecondition = 13,
  kDimensionMismatch = 14,
  kTimeout = 15,
  kInternal = 16,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Transport failures are the only retriable class.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message, int http_status = 0)
      : Error(ErrorCode::kTransport, message), http_status_(http_status) {}

  [[nodiscard]] int http_status() const noexcept { return http_status_; }

 private:
  int http_status_;
};

}  // namespace toolverse
