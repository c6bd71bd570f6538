#pragma once

#include <stdexcept>
#include <string>

namespace treeformer {

enum class ErrorCode {
  SyntaxError,
  UnknownToken,
  KindMismatch,
  MalformedTree,
  ShapeMismatch,
  NonFinite,
  TokenOutOfRange,
  MaskViolation,
  SizeLimit,
  OversizedExample,
  LimitExceeded,
  Terminated,
  IllegalToken,
  DataExhausted,
  DepthExceeded,
  BadConfig,
  IoError,
};

const char* error_code_name(ErrorCode code);

// All recoverable failures surface as this one exception type; `code` is the
// machine-readable part, `what()` carries "<code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::MalformedTree: return "MalformedTree";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::TokenOutOfRange: return "TokenOutOfRange";
    case ErrorCode::MaskViolation: return "MaskViolation";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::OversizedExample: return "OversizedExample";
    case ErrorCode::LimitExceeded: return "LimitExceeded";
    case ErrorCode::Terminated: return "Terminated";
    case ErrorCode::IllegalToken: return "IllegalToken";
    case ErrorCode::DataExhausted: return "DataExhausted";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace treeformer
