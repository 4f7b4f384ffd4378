#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wavefit {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file that cannot be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Value outside its valid domain (week numbers, months, model parameters).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Tables that cannot be combined: nation, measure or week-range mismatch.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A malformed input row. `row` is the 1-based line number (header = 1).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& message)
      : Error("row " + std::to_string(row) + (column.empty() ? "" : ", column '" + column + "'") + ": " +
              message),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// Optimizer failure: singular damped system, non-finite model output.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Fewer defined points than the model needs.
class InsufficientDataError : public FitError {
 public:
  using FitError::FitError;
};

}  // namespace wavefit
