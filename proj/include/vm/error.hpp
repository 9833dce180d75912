#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vm {

// Base for every error the library raises. `kind()` is a stable machine-readable tag
// used in the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Structurally broken input (unterminated quote, wrong header, ...).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("parse_error", "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A file the run needs does not exist or cannot be read.
class InputError : public Error {
 public:
  InputError(std::string path, const std::string& what)
      : Error("input_error", what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Violated precondition of a numerical operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain_error", what) {}
};

// Too little data to run an estimator.
class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& what) : Error("insufficient_data", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config_error", what) {}
};

}  // namespace vm
