// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace concil {

// Root of the library's exception hierarchy. Every failure surfaced by the
// public API derives from this, so callers can catch one type at the boundary.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape violations: operand dimensions do not line up.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// A linear system that should have been solvable turned out numerically
// singular (rank-deficient Gram with zero regularization, degenerate
// inner Woodbury system, ...).
class SingularSystem : public Error {
public:
    using Error::Error;
};

// Cholesky factorization failed: the matrix is not symmetric positive definite.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

// Invalid configuration value or infeasible experiment setup.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Phase index outside the schedule.
class PhaseOutOfRange : public Error {
public:
    using Error::Error;
};

// An incremental batch re-introduced a class id that an earlier phase owns.
class DisjointClassViolation : public Error {
public:
    using Error::Error;
};

// The baseline learner cannot refit from an empty batch.
class EmptyBatch : public Error {
public:
    using Error::Error;
};

// Metric queried on a history that is not filled through the requested phase.
class IncompleteHistory : public Error {
public:
    using Error::Error;
};

// Filesystem / read / write failure.
class IoError : public Error {
public:
    using Error::Error;
};

// Serialized artifact carries an unsupported format version.
class VersionMismatch : public Error {
public:
    using Error::Error;
};

// Serialized artifact failed its integrity digest.
class DigestMismatch : public Error {
public:
    using Error::Error;
};

// Dataset bundle violates its manifest (named field in the message).
class SchemaError : public Error {
public:
    using Error::Error;
};

} // namespace concil
