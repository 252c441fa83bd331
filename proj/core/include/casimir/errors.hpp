#pragma once

#include <stdexcept>
#include <string>

namespace casimir {

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a kernel is asked for a value at a point where it has no finite limit.
class SingularArgument : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double condition = 0.0)
        : std::runtime_error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class DependencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace casimir
