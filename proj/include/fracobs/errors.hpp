#pragma once

#include <stdexcept>
#include <string>

namespace fracobs {

/// Argument outside the mathematical domain of an operation (s outside (0,1), x == y, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inconsistent or invalid use of the API (mismatched meshes, empty admissible set, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A quadrature or algebraic procedure failed to deliver a trustworthy result.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fracobs
