// SPDX-License-Identifier: Apache-2.0
#include "concil/linalg.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "concil/errors.hpp"

namespace concil {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_finite(const DenseMatrix& m, const char* op) {
    if (!m.all_finite()) {
        throw SingularSystem(std::string(op) + ": result contains non-finite entries");
    }
}

// Cholesky solve of lhs * S = rhs. The caller guarantees lhs is square and
// symmetric; failure of the factorization is reported through `on_failure`.
DenseMatrix cholesky_solve(const DenseMatrix& lhs, const DenseMatrix& rhs,
                           const char* op, void (*on_failure)(const char*)) {
    Eigen::Map<const EigenRowMajor> a(lhs.data(), static_cast<Eigen::Index>(lhs.rows()),
                                      static_cast<Eigen::Index>(lhs.cols()));
    Eigen::LLT<EigenRowMajor> llt(a);
    if (llt.info() != Eigen::Success) {
        on_failure(op);
    }
    DenseMatrix out(rhs.rows(), rhs.cols());
    Eigen::Map<const EigenRowMajor> b(rhs.data(), static_cast<Eigen::Index>(rhs.rows()),
                                      static_cast<Eigen::Index>(rhs.cols()));
    Eigen::Map<EigenRowMajor> s(out.data(), static_cast<Eigen::Index>(out.rows()),
                                static_cast<Eigen::Index>(out.cols()));
    s = llt.solve(b);
    return out;
}

[[noreturn]] void throw_not_positive_definite(const char* op) {
    throw NotPositiveDefinite(std::string(op) + ": Cholesky factorization failed");
}

[[noreturn]] void throw_singular(const char* op) {
    throw SingularSystem(std::string(op) + ": system is numerically singular");
}

} // namespace

DenseMatrix solve_spd(const DenseMatrix& lhs, const DenseMatrix& rhs) {
    if (lhs.rows() != lhs.cols()) {
        throw DimensionMismatch("solve_spd: lhs is not square");
    }
    if (lhs.rows() != rhs.rows()) {
        throw DimensionMismatch("solve_spd: lhs is " + std::to_string(lhs.rows()) +
                                "x" + std::to_string(lhs.cols()) + " but rhs has " +
                                std::to_string(rhs.rows()) + " rows");
    }
    const double scale = std::max(1.0, lhs.max_abs());
    for (std::size_t r = 0; r < lhs.rows(); ++r) {
        for (std::size_t c = r + 1; c < lhs.cols(); ++c) {
            if (std::abs(lhs(r, c) - lhs(c, r)) > 1e-9 * scale) {
                throw NotPositiveDefinite("solve_spd: lhs is not symmetric");
            }
        }
    }
    DenseMatrix out = cholesky_solve(lhs, rhs, "solve_spd", [](const char* op) {
        throw_not_positive_definite(op);
    });
    require_finite(out, "solve_spd");
    return out;
}

DenseMatrix ridge_fit(const RidgeProblem& problem) {
    const DenseMatrix& x = problem.inputs;
    const DenseMatrix& c = problem.targets;
    if (x.rows() != c.rows()) {
        throw DimensionMismatch("ridge_fit: inputs have " + std::to_string(x.rows()) +
                                " rows but targets have " + std::to_string(c.rows()));
    }
    if (problem.lambda < 0.0) {
        throw ConfigError("ridge_fit: lambda must be nonnegative");
    }
    DenseMatrix gram = gram_matrix(x);
    gram.add_scaled_identity(problem.lambda);
    DenseMatrix rhs = transpose_multiply(x, c);
    DenseMatrix w = cholesky_solve(gram, rhs, "ridge_fit", [](const char* op) {
        throw_singular(op);
    });
    require_finite(w, "ridge_fit");
    return w;
}

DenseMatrix inverse_correlation(const DenseMatrix& inputs, double lambda) {
    if (!(lambda > 0.0)) {
        throw ConfigError("inverse_correlation: lambda must be positive");
    }
    DenseMatrix gram = gram_matrix(inputs);
    gram.add_scaled_identity(lambda);
    DenseMatrix r = cholesky_solve(gram, DenseMatrix::identity(inputs.cols()),
                                   "inverse_correlation", [](const char* op) {
                                       throw_singular(op);
                                   });
    r = symmetrized(r);
    require_finite(r, "inverse_correlation");
    return r;
}

DenseMatrix woodbury_update(const DenseMatrix& prev_R, const DenseMatrix& new_inputs) {
    if (prev_R.rows() != prev_R.cols()) {
        throw DimensionMismatch("woodbury_update: prev_R is not square");
    }
    if (new_inputs.cols() != prev_R.rows()) {
        throw DimensionMismatch("woodbury_update: new inputs have " +
                                std::to_string(new_inputs.cols()) + " columns but prev_R is " +
                                std::to_string(prev_R.rows()) + "x" +
                                std::to_string(prev_R.cols()));
    }
    const std::size_t batch = new_inputs.rows();
    if (batch == 0) {
        return prev_R;
    }
    // ZR = Z * R (N x d), inner = I_N + (ZR) Z^T (N x N, SPD for SPD prev_R).
    DenseMatrix zr = new_inputs * prev_R;
    DenseMatrix inner = multiply_transpose(zr, new_inputs);
    inner.add_scaled_identity(1.0);
    inner = symmetrized(inner);
    DenseMatrix solved = cholesky_solve(inner, zr, "woodbury_update", [](const char* op) {
        throw_singular(op);
    });
    // R' = R - (ZR)^T * inner^{-1} * (ZR), then re-symmetrize.
    DenseMatrix updated = prev_R - transpose_multiply(zr, solved);
    updated = symmetrized(updated);
    require_finite(updated, "woodbury_update");
    return updated;
}

} // namespace concil
