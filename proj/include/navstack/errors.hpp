#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace navstack {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LexError : public Error {
 public:
  LexError(std::size_t line, std::size_t column, const std::string& what)
      : Error("lex error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::vector<std::string> expected,
             const std::string& found)
      : Error(format(line, column, expected, found)),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string format(std::size_t line, std::size_t column,
                            const std::vector<std::string>& expected, const std::string& found) {
    std::string msg = "parse error at " + std::to_string(line) + ":" + std::to_string(column) +
                      ": found " + found + ", expected one of {";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i != 0) msg += ", ";
      msg += expected[i];
    }
    return msg + "}";
  }

  std::size_t line_;
  std::size_t column_;
  std::vector<std::string> expected_;
};

class UndefinedName : public Error {
 public:
  using Error::Error;
};

class CyclicDefinition : public Error {
 public:
  using Error::Error;
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

class UnknownSort : public Error {
 public:
  using Error::Error;
};

class MissingAtom : public Error {
 public:
  using Error::Error;
};

class UnknownLocation : public Error {
 public:
  using Error::Error;
};

/// The mission monitor has no live position left: no continuation of the
/// observed trace can satisfy the mission.
class DeadMission : public Error {
 public:
  using Error::Error;
};

class NoPath : public Error {
 public:
  using Error::Error;
};

class NoCompliantRoute : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace navstack
