#pragma once

#include <stdexcept>
#include <string>

namespace fluctuon {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad dimension, dt <= 0, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The grid cannot resolve the requested noise cutoff without aliasing.
class ResolutionTooSmall : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Two fields or a field and a model live on different grids.
class GridMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A noise schedule does not satisfy sqrt(eps) * (|F1| + |F2| + |F3|) -> 0.
class RegimeViolation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Configuration file or flag problem; the message names the key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Reports produced from different configurations were about to be combined.
class ReportMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace fluctuon
