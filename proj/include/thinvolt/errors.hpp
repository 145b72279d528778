#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace thinvolt {

// Input outside the mathematical domain of an operation (e.g. det F <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A type invariant was violated by caller-supplied data.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A linear system that should be regular turned out to be singular.
class DegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative solver did not reach its tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> residuals)
        : std::runtime_error(what), residual_history_(std::move(residuals)) {}

    const std::vector<double>& residual_history() const noexcept { return residual_history_; }

private:
    std::vector<double> residual_history_;
};

// Deformation has a cell with non-positive Jacobian.
class OrientationError : public DomainError {
public:
    OrientationError(const std::string& what, std::size_t cell)
        : DomainError(what), cell_(cell) {}

    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace thinvolt
