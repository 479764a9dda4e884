#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nsp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (z <= 0, bad grid, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Spectral operation that needs a mean-zero field received one with a mean.
class MeanZeroError : public DomainError {
public:
  MeanZeroError() : DomainError("mean-zero required") {}
};

/// An iterative procedure ran out of iterations or tolerance budget.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

private:
  std::vector<double> history_;
};

/// Total density left (0, inf), or a field went non-finite, during a solve.
class PositivityError : public Error {
public:
  PositivityError(const std::string& what, std::size_t index, double value)
      : Error(what), index_(index), value_(value) {}

  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

private:
  std::size_t index_;
  double value_;
};

}  // namespace nsp
