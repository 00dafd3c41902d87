#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twinbeam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Too few samples for an estimator (e.g. variance of fewer than two points).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Paired arrays of different lengths.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Model parameters that imply a non positive-semidefinite covariance.
class UnphysicalModelError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on a channel with zero variance.
class DegenerateConditioningError : public Error {
 public:
  using Error::Error;
};

/// Truncation band carrying less probability mass than can be represented.
class UnderflowError : public Error {
 public:
  using Error::Error;
};

/// Overlapping selection bands passed where a partition is required.
class InvalidPartitionError : public Error {
 public:
  using Error::Error;
};

/// A selection band accepted fewer than two samples.
class InsufficientSelectionError : public Error {
 public:
  InsufficientSelectionError(double success_rate, std::size_t accepted)
      : Error("insufficient selection: " + std::to_string(accepted) +
              " sample(s) accepted (success rate " +
              std::to_string(success_rate) + "); widen the band"),
        success_rate_(success_rate),
        accepted_(accepted) {}

  double success_rate() const noexcept { return success_rate_; }
  std::size_t accepted() const noexcept { return accepted_; }

 private:
  double success_rate_;
  std::size_t accepted_;
};

/// File-system failure; the message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed trace file. `line()` is 1-based.
class TraceParseError : public Error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid or incomplete scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace twinbeam
