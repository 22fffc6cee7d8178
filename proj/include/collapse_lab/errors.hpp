#ifndef COLLAPSE_LAB_ERRORS_HPP
#define COLLAPSE_LAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace clab {

// Precondition / parameter-range violations. CLI maps these to exit code 3.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Register would exceed the configured particle limit.
class CapacityError : public DomainError {
public:
    explicit CapacityError(const std::string& what) : DomainError(what) {}
};

// A walk ran past its step budget without absorbing.
class StepBudgetError : public std::runtime_error {
public:
    explicit StepBudgetError(const std::string& what) : std::runtime_error(what) {}
};

// Command-line / config-file problems. CLI maps these to exit code 2.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failures. CLI maps these to exit code 4.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace clab

#endif
