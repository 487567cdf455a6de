#pragma once

#include <stdexcept>
#include <string>

namespace convexflow {

// Caller broke a documented precondition.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// A runtime-checked algorithm invariant failed; always a solver bug.
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Input data is well formed but outside the model (negative budget, unbalanced demands, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
    ParseError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}
