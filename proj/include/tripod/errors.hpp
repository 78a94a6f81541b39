#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tripod {

// Root of every error the library throws. The CLI maps each subclass to its
// own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Configuration text could not be read into a run description.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string field, std::size_t line = 0)
      : Error(message), field_(std::move(field)), line_(line) {}

  const std::string& field() const { return field_; }
  // 1-based; 0 when the error is not tied to a position in the text.
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

// Time stepping produced a non-finite or runaway value.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::size_t cell)
      : Error(message), cell_(cell) {}

  std::size_t cell() const { return cell_; }

 private:
  std::size_t cell_;
};

// The released pulse did not carry the stored excitation out of the medium.
class ReleaseError : public Error {
 public:
  using Error::Error;
};

}  // namespace tripod
