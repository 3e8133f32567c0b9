#pragma once

#include <stdexcept>
#include <string>

namespace nts {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, corpora, audio).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A text file could not be parsed; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A model (network weights, tagger, statistics) is missing, corrupt or
/// incompatible with the data it is applied to.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace nts
