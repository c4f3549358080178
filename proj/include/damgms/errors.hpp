#pragma once

#include <stdexcept>
#include <string>

namespace damgms {

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input file (field CSV, dumps).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Factorization breakdown, residual above contract, singular coarse operator.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace damgms
