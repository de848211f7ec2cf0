#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace bcsgap {

/// A violated parameter invariant. name() identifies the invariant.
class InvalidParameter : public std::invalid_argument {
public:
    InvalidParameter(std::string name, const std::string& detail)
        : std::invalid_argument(name + ": " + detail), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iteration ran out of budget. ratio carries the last observed
/// contraction ratio when there is one (NaN otherwise).
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double ratio = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), ratio_(ratio) {}
    double ratio() const noexcept { return ratio_; }

private:
    double ratio_;
};

/// A computed object failed one of its structural invariants.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bcsgap
