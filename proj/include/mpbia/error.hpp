#pragma once

#include <stdexcept>
#include <string>

namespace mpbia {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument or state outside the domain of a formula (negative radicand,
/// non-positive variance, non-finite input, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Declared dimensions or coupling structure disagree with what a callback produced.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Newton iteration failed. Carries the iterate at which it happened.
class SolverError : public Error {
public:
    SolverError(const std::string& what, int iteration, double residual_norm)
        : Error(what), iteration_(iteration), residual_norm_(residual_norm) {}

    [[nodiscard]] int iteration() const noexcept { return iteration_; }
    [[nodiscard]] double residual_norm() const noexcept { return residual_norm_; }

private:
    int iteration_;
    double residual_norm_;
};

class SingularJacobianError : public SolverError {
public:
    using SolverError::SolverError;
};

class NonConvergenceError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Posterior normalization or information-gain quadrature cannot be formed.
class InferenceError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration or input file.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Provenance of two artifacts does not match.
class ProvenanceError : public Error {
public:
    using Error::Error;
};

}  // namespace mpbia
