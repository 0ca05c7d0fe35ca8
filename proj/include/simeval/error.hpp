#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace simeval {

// Base of every error raised by the toolkit. `kind()` is the short tag used in
// the CLI's JSON error envelope.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// A value broke a documented invariant (level out of range, empty text, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

// Input could not be decoded. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : Error(line ? "line " + std::to_string(*line) + ": " + what : what), line_(line) {}
  const char* kind() const noexcept override { return "parse"; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path) : Error(what + ": " + path), path_(std::move(path)) {}
  const char* kind() const noexcept override { return "io"; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Failure talking to an external scorer: timeout, broken pipe, malformed
// response, unmatched request id.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, std::optional<long long> id = std::nullopt)
      : Error(id ? what + " (request id " + std::to_string(*id) + ")" : what), id_(id) {}
  const char* kind() const noexcept override { return "transport"; }
  std::optional<long long> id() const noexcept { return id_; }

 private:
  std::optional<long long> id_;
};

// Numerical failure, e.g. a singular normal-equations system.
class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric"; }
};

// Bad command line or config file.
class UsageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage"; }
};

}  // namespace simeval
