// errors.hpp — Exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace lfvlab {

// Matrix/grid/mesh dimension mismatches.
struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Violated physical or structural preconditions (non-Hermitian input,
// unnormalized state, out-of-range parameter, ...).
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// sin(omega * t) below the configured floor: the harmonic boundary-value
// problem and its propagator prefactor degenerate.
struct CausticError : std::domain_error {
    explicit CausticError(const std::string& msg) : std::domain_error(msg) {}
};

// Time or grid argument outside its admissible range.
struct DomainError : std::domain_error {
    explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// Numerical failure (non-finite values, eigensolver breakdown, overflow).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Work bound exceeded for an exhaustive enumeration.
struct SizeError : std::invalid_argument {
    explicit SizeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Requested mesh point missing from a stored state history.
struct MissingHistoryError : std::invalid_argument {
    explicit MissingHistoryError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Collision time does not coincide with a mesh point.
struct MeshAlignmentError : std::invalid_argument {
    explicit MeshAlignmentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// File I/O failure in the scenario runner.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lfvlab
