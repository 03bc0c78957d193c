#pragma once

#include <stdexcept>
#include <string>

namespace teleposture {

/// Base error. The message is prefixed with the module that raised it, e.g. "[calib] ...".
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error("[" + module + "] " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Bad arguments or non-finite values handed to an operation.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration detected at load time (e.g. singular covariance).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(std::string module, const std::string& what, std::size_t line = 0)
      : Error(std::move(module), line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Timestamps that are not strictly increasing. `index` is the offending sample.
class OrderingError : public InputError {
 public:
  OrderingError(std::string module, std::size_t index, const std::string& what)
      : InputError(std::move(module), "sample " + std::to_string(index) + ": " + what),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace teleposture
