#pragma once

#include <stdexcept>
#include <string>

namespace pnbound {

// Input violates an assumption of the discrete fast-time/slow-time model.
class ModelValidityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Derivative requested exactly at the |lag| kink of the PN variance.
class UndefinedDerivativeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class DegenerateCovarianceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Singular information matrix; the message names the dominant null-space parameter.
class UnidentifiableError : public std::runtime_error {
public:
    UnidentifiableError(const std::string& what, std::string direction)
        : std::runtime_error(what), direction_(std::move(direction)) {}
    const std::string& direction() const noexcept { return direction_; }

private:
    std::string direction_;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pnbound
