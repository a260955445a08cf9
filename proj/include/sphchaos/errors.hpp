#pragma once

#include <stdexcept>
#include <string>

namespace sphchaos {

// Invalid argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

class UnsupportedOrder : public DomainError {
 public:
  using DomainError::DomainError;
};

class DivergentIntegral : public DomainError {
 public:
  using DomainError::DomainError;
};

// Asked for a ratio whose scaling does not match the quantity (q = 2 moments).
class RateMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

class ZeroVariance : public DomainError {
 public:
  using DomainError::DomainError;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature that could not reach its tolerance; carries the best attempt.
class ToleranceError : public std::runtime_error {
 public:
  ToleranceError(const std::string& what, double best, double err)
      : std::runtime_error(what), best_value(best), err_est(err) {}
  double best_value;
  double err_est;
};

}  // namespace sphchaos
