#pragma once

#include <stdexcept>
#include <string>

namespace bdsurvey {

/// Precondition or domain violation (bad probability, empty sample, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Weighted Gram matrix is singular or too ill-conditioned to solve.
class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative or linear solver could not make progress.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A variance formula needs design information that was not supplied.
class DesignInformationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested Jacobian strategy does not apply to the estimating function.
class UnsupportedStrategyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Superpopulation CDF could not be built from its bracket specification.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature or other numeric routine failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config or input file failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bdsurvey
