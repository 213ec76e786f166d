#include "errors.hpp"

namespace styleflow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::hook_contract: return "hook contract error";
    case ErrorKind::capture_conflict: return "capture conflict";
    case ErrorKind::injection_miss: return "injection miss";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::format: return "format error";
    case ErrorKind::io: return "I/O error";
  }
  return "error";
}

}  // namespace styleflow
