#pragma once

#include <stdexcept>
#include <string>

namespace csen {

enum class ErrorKind {
  dimension,
  numeric,
  data,
  parse,
  parameter,
  persistence,
  unsupported,
  training,
  usage,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

// Process exit code for an error kind: 1 usage, 2 data, 3 numeric.
int exit_code(ErrorKind kind) noexcept;

}  // namespace csen
