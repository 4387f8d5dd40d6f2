#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bpi {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class InsufficientSamples : public Error {
public:
  using Error::Error;
};

class SymmetryError : public Error {
public:
  using Error::Error;
};

class IndexError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class OrderError : public Error {
public:
  using Error::Error;
};

/// Negative eigenvalue on a covariance input beyond the clamping tolerance.
class SpectrumError : public Error {
public:
  using Error::Error;
};

class DataError : public Error {
public:
  using Error::Error;
};

/// The mask cannot be reordered into a staircase. Coordinates refer to the
/// original (input) sample and feature indices, 0-based.
class NotMonotone : public Error {
public:
  NotMonotone(std::size_t sample, std::size_t feature)
      : Error("mask is not monotone: violating cell at sample " + std::to_string(sample) +
              ", feature " + std::to_string(feature)),
        sample_(sample), feature_(feature) {}

  std::size_t sample() const noexcept { return sample_; }
  std::size_t feature() const noexcept { return feature_; }

private:
  std::size_t sample_;
  std::size_t feature_;
};

class AllMissingColumn : public Error {
public:
  explicit AllMissingColumn(std::size_t column)
      : Error("column " + std::to_string(column) + " has no observed entries"), column_(column) {}

  std::size_t column() const noexcept { return column_; }

private:
  std::size_t column_;
};

} // namespace bpi
