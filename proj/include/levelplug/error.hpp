#pragma once

#include <stdexcept>
#include <string>

namespace levelplug {

/// Invalid argument values: dimensions, rates, levels, scale factors.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A point outside the support of the function being evaluated.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Malformed or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The regularity hypotheses (positive gradient infimum, finite Hessian
/// supremum, nonempty level curves in the box) do not hold.
struct GateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptySetError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
}

}  // namespace detail
}  // namespace levelplug
