#pragma once

#include <stdexcept>
#include <string>

namespace gpe {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two fields (or a field and an operator) live on different grids.
class GridMismatch : public Error {
 public:
  GridMismatch() : Error("fields are defined on different grids") {}
  explicit GridMismatch(const std::string& what) : Error(what) {}
};

/// An operation was requested in a dimension that does not support it.
class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied parameter (grid size, tolerance, shift, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf encountered in a field.
class NonFinite : public Error {
 public:
  using Error::Error;
};

/// An iterative solver gave up (breakdown, max iterations, divergence).
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace gpe
