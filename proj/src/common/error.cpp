#include "edudss/common/error.hpp"

namespace edudss {

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kUsage:
      return 2;
    case ErrorKind::kData:
    case ErrorKind::kIntegrity:
      return 3;
    case ErrorKind::kModel:
      return 4;
    case ErrorKind::kConflict:
    case ErrorKind::kService:
      return 5;
  }
  return 5;
}

}  // namespace edudss
