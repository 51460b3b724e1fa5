#pragma once

#include <stdexcept>
#include <string>

namespace fracwave {

// Inputs outside the admissible parameter domain (alpha range, tolerance range,
// positive final time, ...).
struct DomainError : std::invalid_argument {
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A series/quadrature regime failed to reach the requested tolerance.  For the
// supported argument range this indicates a bug, not a user error.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Requested more modes than the spatial grid can resolve.
struct ResolutionError : std::invalid_argument {
    explicit ResolutionError(const std::string& what) : std::invalid_argument(what) {}
};

// Diffusion coefficient dips below its ellipticity floor.
struct EllipticityError : std::invalid_argument {
    explicit EllipticityError(const std::string& what) : std::invalid_argument(what) {}
};

// Sample vectors do not match the grid they are claimed to live on.
struct GridMismatch : std::invalid_argument {
    explicit GridMismatch(const std::string& what) : std::invalid_argument(what) {}
};

// Dirichlet data violated beyond tolerance.
struct BoundaryError : std::invalid_argument {
    explicit BoundaryError(const std::string& what) : std::invalid_argument(what) {}
};

// Observation data violates the compatibility condition g(0) = sum h_n phi_n.
struct IncompatibleData : std::runtime_error {
    explicit IncompatibleData(const std::string& what) : std::runtime_error(what) {}
};

// ||h||^2 is numerically zero; the reduced second-kind equation degenerates.
struct DegenerateWeight : std::runtime_error {
    explicit DegenerateWeight(const std::string& what) : std::runtime_error(what) {}
};

// A modal sensitivity coefficient b_n is too small to divide by.
struct InsensitiveMode : std::runtime_error {
    explicit InsensitiveMode(const std::string& what) : std::runtime_error(what) {}
};

// The known time factor f vanishes identically; the space source is unrecoverable.
struct DegenerateForcing : std::runtime_error {
    explicit DegenerateForcing(const std::string& what) : std::runtime_error(what) {}
};

// A task was invoked on data that violates its scenario assumptions
// (e.g. the difference-field energy check with nonzero initial data).
struct ScenarioError : std::runtime_error {
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or incomplete run configuration; message names the offending field.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fracwave
