#pragma once

#include <stdexcept>
#include <string>

namespace convexmetrics {

// A parameter lies outside the domain where an operation is defined.
class ParameterError : public std::domain_error {
public:
    ParameterError(std::string parameter, const std::string& what)
        : std::domain_error(parameter + ": " + what), parameter_(std::move(parameter)) {}

    const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

// A moment or variance the operation needs is infinite.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// The problem is larger than the configured size cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An estimator failed to produce a value (solver breakdown, not a domain issue).
class EstimatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid experiment configuration or unreadable/unwritable file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace convexmetrics
