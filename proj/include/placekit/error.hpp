#pragma once

#include <stdexcept>
#include <string>

namespace placekit {

enum class ErrorKind {
  parse,      // malformed input text (JSON, checkpoint, ...)
  schema,     // well-formed input with wrong shape/types/values
  reference,  // dangling id or index
  contract,   // API precondition violated by the caller
  network,    // remote provider unreachable
  timeout,    // remote provider exceeded its deadline
  io,         // filesystem failure
  capacity,   // input exceeds a documented size limit
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace placekit
