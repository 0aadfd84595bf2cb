#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace masksearch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated on-disk data (MSK1, PNM, CHI1, catalog lines).
class FormatError : public Error {
 public:
  enum class Kind { malformed_header, truncated, value_out_of_range, bad_magic, version, malformed };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Dialect syntax error; what() is formatted as `line:col: message`.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        message_(message) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }
  [[nodiscard]] const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

/// A well-formed plan that cannot run against a particular catalog.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Duplicate ids and other catalog consistency violations.
class CatalogError : public Error {
 public:
  using Error::Error;
};

/// Index lookups for masks that have no histogram, or config mismatches.
class IndexError : public Error {
 public:
  using Error::Error;
};

class QueryTimeout : public Error {
 public:
  using Error::Error;
};

}  // namespace masksearch
