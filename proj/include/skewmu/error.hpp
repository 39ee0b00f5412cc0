#pragma once

#include <stdexcept>
#include <string>

namespace skewmu {

/// Base class for every error thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input failed a precondition (bad alpha spec, nonzero mean where zero is required, ...).
class validation_error : public error {
public:
    using error::error;
};

/// A configured budget (steps, grid size, memory) would be exceeded.
class budget_error : public error {
public:
    using error::error;
};

/// The working precision cannot certify the next partial quotient.
class precision_error : public error {
public:
    using error::error;
};

/// Integer range exceeded while building convergents.
class overflow_error : public error {
public:
    using error::error;
};

/// A frequency lies beyond the computed convergents, so its band cannot be decided.
class undecidable_error : public error {
public:
    using error::error;
};

/// ||m alpha|| fell below the configured floor while solving the cohomological equation.
class small_divisor_error : public error {
public:
    using error::error;
};

/// The Mobius table does not reach the requested N.
class sieve_range_error : public error {
public:
    using error::error;
};

}  // namespace skewmu
