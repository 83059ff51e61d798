#pragma once

#include <stdexcept>
#include <string>

namespace htq {

// Bad inputs: violated preconditions, malformed models, infeasible rates.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures: divergent runs, non-integrable test functions.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Command-line / config-file misuse (unknown keys, unknown subcommands). Exit code 2.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace htq
