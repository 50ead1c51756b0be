#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace parisian {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One violated modelling constraint, e.g. the net-profit condition.
struct Violation {
    std::string code;     ///< stable machine-readable identifier
    std::string message;  ///< human-readable inequality that failed
};

/// Thrown when parameters or models break their invariants.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    ValidationError(std::string code, const std::string& message);

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Thrown by numerical kernels: bracketing, convergence, domain failures.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A root-finding bracket without a sign change.
class BracketError : public NumericalError {
public:
    BracketError(const std::string& what, double lo, double hi, double f_lo, double f_hi);

    double lo;
    double hi;
    double f_lo;
    double f_hi;
};

/// Iteration budget exhausted; carries the last bracket and residual.
class MaxIterationsError : public NumericalError {
public:
    MaxIterationsError(const std::string& what, double lo, double hi, double last_residual);

    double lo;
    double hi;
    double last_residual;
};

/// Evaluation outside the domain of a function (e.g. a divergent MGF).
class DomainError : public NumericalError {
public:
    DomainError(const std::string& what, double boundary);

    double boundary;
};

}  // namespace parisian
