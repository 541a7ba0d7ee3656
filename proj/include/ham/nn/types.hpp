#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace ham {

namespace nn {

using Scalar = double;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace nn

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// More inputs than the tree has leaves.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// An API was called in the wrong order or with malformed arguments.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, task selection or file contents.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf reached an operation boundary.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ham
