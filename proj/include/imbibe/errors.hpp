#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace imbibe {

/// Argument outside the mathematical domain of a kernel (caller bug).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid or inconsistent configuration (grids, boxes, settings).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or physically inconsistent input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Base for failures of a numerical procedure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time step violates the stability bound dt <= n0 dz^2 / D.
class CflError : public NumericalError {
public:
    CflError(double dt, double bound);
    double dt() const noexcept { return dt_; }
    double bound() const noexcept { return bound_; }

private:
    double dt_;
    double bound_;
};

/// The explicit update left the physical range or produced non-finite values.
class DivergenceError : public NumericalError {
public:
    explicit DivergenceError(std::size_t step);
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Adaptive ODE integration could not proceed (step size underflow).
class IntegrationError : public NumericalError {
public:
    explicit IntegrationError(double reached_time);
    double reached_time() const noexcept { return reached_; }

private:
    double reached_;
};

/// Data times that do not fall on the simulation time grid.
class AlignmentError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

} // namespace imbibe
