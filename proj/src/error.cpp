#include "daimc/error.hpp"

namespace daimc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input:
      return "invalid-input";
    case ErrorKind::numeric:
      return "numeric";
    case ErrorKind::format:
      return "format";
    case ErrorKind::constraint_violation:
      return "constraint-violation";
    case ErrorKind::io:
      return "io";
  }
  return "unknown";
}

}  // namespace daimc
