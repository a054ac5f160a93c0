#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace defcast {

/// Malformed or inconsistent input (bad JSON, wrong dimensions, non-finite values).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A kernel whose imbedding constant cannot be bounded from its declaration.
class UnboundedConstantError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Test function with zero RKHS norm.
class DegenerateFunctionError : public InputError {
public:
    using InputError::InputError;
};

/// The neutralization solve did not reach its tolerance.
class SolverFailure : public std::runtime_error {
public:
    explicit SolverFailure(const std::string& what, std::size_t round = 0)
        : std::runtime_error(what), round_(round) {}

    std::size_t round() const noexcept { return round_; }

private:
    std::size_t round_;
};

}  // namespace defcast
