#pragma once

#include <stdexcept>
#include <string>

namespace nmc {

inline constexpr const char* kVersion = "0.1.0";

// Argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Numeric failure (solver breakdown, underflow, bisection failure).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two jump streams collided on the same instant; the caller redraws.
class TieError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A conditioning function vanished on a reachable state.
class DegenerateConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Not enough data to form an estimate.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nmc
