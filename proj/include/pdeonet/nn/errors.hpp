#pragma once

#include <stdexcept>
#include <string>

namespace pdeonet {

/// Input vector or matrix does not have the dimensions an operation requires.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An argument is outside the range where an operation is defined.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure (root finding, factorization) failed.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A constructive approximation could not reach its requested accuracy.
class ApproximationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Galerkin matrix is numerically singular (coercivity violated).
class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Accuracy budget cannot be met with the requested target.
class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parametric expansion tail does not decay on the test grid.
class FamilyDecayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pdeonet
