#pragma once

#include <stdexcept>
#include <string>

namespace sgbench {

// Base for every error the library raises. The C API maps each subclass to
// a status code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something outside an operation's domain.
class InvalidInput : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class IoError : public Error {
public:
  using Error::Error;
};

// Pipeline state does not allow the request (missing upstream artifacts,
// manifest hash mismatch, output already present).
class StateError : public Error {
public:
  using Error::Error;
};

}  // namespace sgbench
