#pragma once

#include <stdexcept>
#include <string>

namespace styleflow {

enum class ErrorKind {
  dimension,
  parameter,
  hook_contract,
  capture_conflict,
  injection_miss,
  parse,
  format,
  io,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; the kind drives the C status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace styleflow
