#include "schro/error.hpp"

namespace schro {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Format: return "format";
    case ErrorCode::Argument: return "argument";
    case ErrorCode::Contract: return "contract";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::Degenerate: return "degenerate";
    case ErrorCode::Numerical: return "numerical";
    case ErrorCode::Size: return "size";
    case ErrorCode::Io: return "io";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

}  // namespace schro
