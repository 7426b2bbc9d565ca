#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrflow {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameter or argument (non-positive Stokes number, empty box, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Position or time outside the declared domain of a flow field.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation requested exactly at an integrable singularity.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Closed form requested outside the parameter regime where it exists.
class UnsupportedRegimeError : public Error {
public:
    using Error::Error;
};

/// Non-finite value produced while evaluating a field or iterate.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Picard iteration failed to reach the requested tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual, std::size_t window_index)
        : Error(what), last_residual_(last_residual), window_index_(window_index) {}

    [[nodiscard]] double last_residual() const noexcept { return last_residual_; }
    [[nodiscard]] std::size_t window_index() const noexcept { return window_index_; }

private:
    double last_residual_;
    std::size_t window_index_;
};

}  // namespace mrflow
