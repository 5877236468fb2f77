#pragma once

#include <stdexcept>
#include <string>

namespace isac {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a closed-form expression (e.g. c <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Requested kurtosis cannot be attained by the two-parameter max-entropy family.
class InfeasibleKurtosis : public DomainError {
public:
    explicit InfeasibleKurtosis(double kappa)
        : DomainError("kurtosis " + std::to_string(kappa) + " outside the attainable interval (1, 2)"),
          kappa_(kappa) {}
    double kappa() const noexcept { return kappa_; }

private:
    double kappa_;
};

/// An iterative numerical procedure failed to meet its tolerance.
class NoConvergence : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace isac
