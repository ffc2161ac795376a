#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slipstokes {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid domain description or mesh (e.g. non-positive height sample).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent problem configuration (missing friction surface, bad options).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// API misuse: mismatched layouts, interior facet where a boundary one is required.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Problem data violating a mathematical requirement (divergence, zeta(0) = 1, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Boundary data with non-zero net flux.
class IncompatibleDataError : public DataError {
 public:
  IncompatibleDataError(const std::string& what, double flux)
      : DataError(what), flux_(flux) {}
  double flux() const { return flux_; }

 private:
  double flux_;
};

/// Linear algebra failure (singular factorization, eigen-solver breakdown).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Newton failed to converge on a time step.
class StepError : public Error {
 public:
  StepError(const std::string& what, int step, std::vector<double> residuals)
      : Error(what), step_(step), residuals_(std::move(residuals)) {}
  int step() const { return step_; }
  const std::vector<double>& residual_history() const { return residuals_; }

 private:
  int step_;
  std::vector<double> residuals_;
};

/// Scenario file rejected; carries the offending key path.
class ParseError : public Error {
 public:
  ParseError(const std::string& key, const std::string& condition)
      : Error(key + ": " + condition), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace slipstokes
