// SPDX-License-Identifier: Apache-2.0
#pragma once

// Regularized closed-form least squares and the rank-k inverse update that
// together drive the incremental learner. All routines are pure functions of
// their inputs and deterministic for a fixed input; they throw on shape
// violations and on numerically degenerate systems instead of returning
// garbage.

#include "concil/matrix.hpp"

namespace concil {

// One regularized least-squares instance:
//   minimize ||targets - inputs * W||_F^2 + lambda * ||W||_F^2
// inputs is N x d, targets is N x k, lambda >= 0. When d > N the Gram matrix
// is singular, so lambda > 0 is required for a solvable problem.
struct RidgeProblem {
    DenseMatrix inputs;
    DenseMatrix targets;
    double lambda = 0.0;
};

// Closed-form ridge solution W = (X^T X + lambda I)^{-1} X^T C, d x k.
// Throws SingularSystem when lambda = 0 and X^T X is rank-deficient,
// DimensionMismatch on shape violations, ConfigError for lambda < 0.
DenseMatrix ridge_fit(const RidgeProblem& problem);

// R = (X^T X + lambda I)^{-1}, d x d, symmetric. lambda must be > 0.
DenseMatrix inverse_correlation(const DenseMatrix& inputs, double lambda);

// Folds a new batch of rows Z (N x d) into an inverse correlation matrix:
//   R' = R - R Z^T (I_N + Z R Z^T)^{-1} Z R
// which is exactly (R^{-1} + Z^T Z)^{-1}. prev_R must be symmetric positive
// definite. The N x N inner system is solved by Cholesky factorization rather
// than the explicit inverse, and the result is re-symmetrized as
// (R' + R'^T)/2 to arrest floating-point drift over long update chains.
// Throws SingularSystem if the inner system is numerically singular (which
// signals a degenerate prev_R).
DenseMatrix woodbury_update(const DenseMatrix& prev_R, const DenseMatrix& new_inputs);

// Solves lhs * S = rhs for symmetric positive definite lhs (n x n) via
// Cholesky factorization. lhs must be symmetric within 1e-9 relative to its
// largest entry. Throws NotPositiveDefinite on factorization failure.
DenseMatrix solve_spd(const DenseMatrix& lhs, const DenseMatrix& rhs);

} // namespace concil
