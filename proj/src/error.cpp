#include "csen/error.hpp"

namespace csen {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::data: return "data error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::persistence: return "persistence error";
    case ErrorKind::unsupported: return "unsupported operation";
    case ErrorKind::training: return "training error";
    case ErrorKind::usage: return "usage error";
  }
  return "error";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage:
      return 1;
    case ErrorKind::numeric:
    case ErrorKind::training:
      return 3;
    default:
      return 2;
  }
}

}  // namespace csen
