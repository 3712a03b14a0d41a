#pragma once

#include <stdexcept>
#include <string>

namespace s2s {

// Numeric values are mirrored by s2s_status in s2s.h; keep them in sync.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kPrecondition = 2,
  kDegenerate = 3,
  kIo = 4,
  kMissingFile = 5,
  kDuplicateId = 6,
  kDimensionMismatch = 7,
  kMalformed = 8,
  kNotFound = 9,
  kValidation = 10,
  kConflict = 11,
  kUnknown = 99,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::kPrecondition, what);
}

}  // namespace s2s
