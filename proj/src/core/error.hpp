#pragma once

#include <stdexcept>
#include <string>

namespace peril {

// All recoverable failures in the library surface as Error. The category is
// coarse on purpose: callers branch on it to map failures onto process exit
// codes (parse/validation/io -> failure, partial -> partial results written).
enum class ErrorKind {
  Validation,  // bad input data (maps, profiles, configs, grids)
  Parse,       // unparseable text or JSON
  Io,          // filesystem failures
  Backend,     // LLM backend failures (auth, transport, bad reply)
  Logic,       // precondition violated by a caller
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace peril
