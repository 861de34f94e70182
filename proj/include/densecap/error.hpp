#pragma once

#include <stdexcept>
#include <string>

namespace densecap {

/// Category of a structured library error.
enum class ErrorKind {
  dimension,    ///< vector/matrix shape mismatch
  invalid_bound,///< B too small or a parameter outside [-B, B]
  parse,        ///< malformed text record
  validation,   ///< structural conditions of a kernel do not hold
  capacity,     ///< exact algorithm requested beyond its configured cap
  parameter,    ///< invalid argument value
  equivalence,  ///< a value that must be constant is not
  data,         ///< dataset missing or corrupt
};

const char* to_string(ErrorKind kind);

/// Exception carrying an ErrorKind alongside a human readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace densecap
