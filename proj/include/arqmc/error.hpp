#pragma once

#include <stdexcept>
#include <string>

namespace arqmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A computation would exceed a configured size or work cap; the caller
/// should switch to a cheaper mode.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace arqmc
