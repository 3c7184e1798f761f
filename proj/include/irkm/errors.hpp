#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irkm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class ZeroReference : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class NonnegViolation : public Error {
 public:
  using Error::Error;
};

class AlphaOutOfRange : public Error {
 public:
  using Error::Error;
};

/// Non-finite results that survive the jitter ladder.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class EmptyDataSource : public Error {
 public:
  using Error::Error;
};

class TooManyTerms : public Error {
 public:
  using Error::Error;
};

class NegativeDegree : public Error {
 public:
  using Error::Error;
};

class UnsupportedP : public Error {
 public:
  using Error::Error;
};

class FileNotFound : public Error {
 public:
  using Error::Error;
};

class MissingColumn : public Error {
 public:
  using Error::Error;
};

/// Parse failure in either the polynomial text format (byte offset) or a CSV
/// file (row/column). Unused location fields are npos.
class ParseError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what + " at row " + std::to_string(row) + ", column " + std::to_string(column)),
        row_(row),
        column_(column) {}

  std::size_t offset() const { return offset_; }
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t offset_ = npos;
  std::size_t row_ = npos;
  std::size_t column_ = npos;
};

class DuplicateVariable : public ParseError {
 public:
  DuplicateVariable(const std::string& var, std::size_t offset)
      : ParseError("duplicate variable " + var + " in term", offset) {}
};

}  // namespace irkm
