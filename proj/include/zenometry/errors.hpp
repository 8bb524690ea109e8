#pragma once

#include <stdexcept>
#include <string>

namespace zenometry {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (negative time, h = 0, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Request outside the sampled range of tabulated data.
class RangeError : public Error {
  public:
    using Error::Error;
};

/// Dense oracle asked for more qubits than it supports.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Malformed or insufficient input data.
class InputError : public Error {
  public:
    using Error::Error;
};

/// Malformed file contents. Carries the 1-based line number when known.
class ParseError : public InputError {
  public:
    ParseError(const std::string &what, std::size_t line)
        : InputError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    explicit ParseError(const std::string &what) : InputError(what) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_ = 0;
};

/// Optimum or root does not exist for the given model.
class NoOptimumError : public Error {
  public:
    using Error::Error;
};

/// Sensitivity diverges: zero slope or zero interrogation time.
class DegenerateError : public Error {
  public:
    using Error::Error;
};

} // namespace zenometry
