#pragma once

#include <stdexcept>
#include <string>

namespace acstokes {

struct DegenerateParametrization : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SelfIntersection : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotADoubleWell : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonIntegrable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Carries the offending compatibility integral so callers can report it.
struct IncompatibleRHS : std::runtime_error {
    double integral;
    explicit IncompatibleRHS(double value)
        : std::runtime_error("right-hand side violates the compatibility condition, integral = " +
                             std::to_string(value)),
          integral(value) {}
};

struct StabilityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CompatibilityDrift : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularForcing : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ClearanceViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CurvatureBlowup : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingTrace : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SeamDiscontinuity : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GridMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonPositiveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace acstokes
