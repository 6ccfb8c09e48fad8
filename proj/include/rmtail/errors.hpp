#pragma once

#include <stdexcept>
#include <string>

namespace rmtail {

/// Argument outside an operation's mathematical domain.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative method failed to converge or a numeric self-check failed.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The equilibrium measure is not supported on a single interval.
class one_cut_violation : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

/// Requested working precision cannot meet the accuracy contract.
class precision_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

}  // namespace rmtail
