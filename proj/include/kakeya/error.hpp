#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kakeya {

enum class ErrorKind {
  invalid_argument,  // precondition or parameter range violated
  dimension,         // unsupported sphere / ambient dimension
  boundary,          // query point lies on (or too close to) a loop
  consistency,       // integer rounding residual too large, loop under-resolved
  resolution,        // grid or mesh too coarse for the requested quantity
  io,                // file could not be read or written
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::boundary: return "boundary";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace kakeya
