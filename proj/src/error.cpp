#include "formeclust/error.hpp"

namespace formeclust {

const char* Error::kind() const noexcept {
  switch (code_) {
    case ExitCode::config:
      return "config";
    case ExitCode::io:
      return "io";
    case ExitCode::numerical:
      return "numerical";
    case ExitCode::ok:
      break;
  }
  return "unknown";
}

}  // namespace formeclust
