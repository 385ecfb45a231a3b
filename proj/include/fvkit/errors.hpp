#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fvkit {

// Base for every error raised by the toolkit. `category()` is a stable,
// machine-readable tag that the CLI prints on stderr.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* category() const noexcept { return "error"; }
};

class FormatError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "format"; }
};

class DataError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "data"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "io"; }
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
  const char* category() const noexcept override { return "version"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "dimension-mismatch"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "invalid-argument"; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "numerical"; }
};

class NotFoundError : public Error {
 public:
  NotFoundError(const std::string& what, std::string category)
      : Error(what), category_(std::move(category)) {}
  const char* category() const noexcept override { return category_.c_str(); }

 private:
  std::string category_;
};

}  // namespace fvkit
