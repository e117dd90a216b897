#ifndef QHEDGE_ERRORS_HPP_
#define QHEDGE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace qhedge {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid law or model parameters (construction time).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Argument outside the strip on which a cumulant function is finite.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A model assumption is violated (degenerate increments, structure
// condition, inadmissible contour abscissa).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Contour discretization failed to converge within its node budget.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

// Downstream numerical failure (e.g. a variance that came out negative
// beyond tolerance).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Configuration file could not be parsed or is inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qhedge

#endif  // QHEDGE_ERRORS_HPP_
