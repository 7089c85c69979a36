#pragma once

#include <stdexcept>
#include <string>

namespace schro {

enum class ErrorCode {
  Format,      // malformed input file or record
  Argument,    // invalid argument value
  Contract,    // violated operator contract (dimensions, self-adjointness)
  Precondition,
  Degenerate,  // zero-norm signal, constant feature, pure initial state
  Numerical,   // non-finite intermediate, overflow, divergence
  Size,        // problem too large for a dense path
  Io,
  Config,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace schro
