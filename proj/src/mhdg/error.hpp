#pragma once

#include <stdexcept>
#include <string>

namespace mhdg {

enum class ErrorCode {
  kInvalidArgument = 1,
  kUnsupported,
  kGeometry,
  kSingular,
  kNotConverged,
  kParameter,
  kIo,
  kInternal,
};

/// Exception carrying a stable error code that the C API maps onto status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace mhdg
