#pragma once

#include <stdexcept>
#include <string>

namespace alarmrisk {

// Bad input files, bad configuration or violated preconditions. CLI exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller broke an operation's contract (wrong scenario, unknown feature, ...).
class ContractError : public InputError {
public:
    using InputError::InputError;
};

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

// Numerical failure of a fit. CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SeparationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CollinearityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// A statistic would divide by zero (constant samples and similar).
class DegenerateInputError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace alarmrisk
