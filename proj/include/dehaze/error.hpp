#pragma once

#include <stdexcept>
#include <string>

namespace dehaze {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The file exists but is not in a supported raster or container format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The file claims a supported format but its contents are truncated or inconsistent.
class CorruptFileError : public Error {
 public:
  using Error::Error;
};

/// Operands have incompatible dimensions, or a model does not match the architecture.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain an operation accepts.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to converge or produced non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_shape(const std::string& what);
[[noreturn]] void throw_domain(const std::string& what);

}  // namespace dehaze
