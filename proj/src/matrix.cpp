// SPDX-License-Identifier: Apache-2.0
#include "concil/matrix.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "concil/errors.hpp"

namespace concil {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const EigenRowMajor>;
using MutableMap = Eigen::Map<EigenRowMajor>;

ConstMap as_eigen(const DenseMatrix& m) {
    return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                    static_cast<Eigen::Index>(m.cols()));
}

MutableMap as_eigen(DenseMatrix& m) {
    return MutableMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                      static_cast<Eigen::Index>(m.cols()));
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch(std::string(op) + ": shapes " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " and " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + " differ");
    }
}

} // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionMismatch("DenseMatrix: data length " + std::to_string(data_.size()) +
                                " does not equal rows*cols = " + std::to_string(rows_ * cols_));
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    return scaled_identity(n, 1.0);
}

DenseMatrix DenseMatrix::scaled_identity(std::size_t n, double value) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = value;
    return m;
}

bool DenseMatrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double DenseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double DenseMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

DenseMatrix DenseMatrix::padded(std::size_t new_rows, std::size_t new_cols) const {
    if (new_rows < rows_ || new_cols < cols_) {
        throw DimensionMismatch("padded: target shape smaller than source");
    }
    DenseMatrix out(new_rows, new_cols);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out(r, c) = (*this)(r, c);
        }
    }
    return out;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix out(cols_, rows_);
    as_eigen(out) = as_eigen(*this).transpose();
    return out;
}

void DenseMatrix::add_scaled_identity(double value) {
    if (rows_ != cols_) {
        throw DimensionMismatch("add_scaled_identity: matrix is not square");
    }
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, i) += value;
}

bool DenseMatrix::operator==(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("operator*: inner dimensions " + std::to_string(a.cols()) +
                                " and " + std::to_string(b.rows()) + " differ");
    }
    DenseMatrix out(a.rows(), b.cols());
    as_eigen(out).noalias() = as_eigen(a) * as_eigen(b);
    return out;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "operator+");
    DenseMatrix out(a.rows(), a.cols());
    as_eigen(out) = as_eigen(a) + as_eigen(b);
    return out;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "operator-");
    DenseMatrix out(a.rows(), a.cols());
    as_eigen(out) = as_eigen(a) - as_eigen(b);
    return out;
}

DenseMatrix operator*(double scalar, const DenseMatrix& a) {
    DenseMatrix out(a.rows(), a.cols());
    as_eigen(out) = scalar * as_eigen(a);
    return out;
}

DenseMatrix transpose_multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) {
        throw DimensionMismatch("transpose_multiply: row counts " + std::to_string(a.rows()) +
                                " and " + std::to_string(b.rows()) + " differ");
    }
    DenseMatrix out(a.cols(), b.cols());
    as_eigen(out).noalias() = as_eigen(a).transpose() * as_eigen(b);
    return out;
}

DenseMatrix multiply_transpose(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) {
        throw DimensionMismatch("multiply_transpose: column counts " + std::to_string(a.cols()) +
                                " and " + std::to_string(b.cols()) + " differ");
    }
    DenseMatrix out(a.rows(), b.rows());
    as_eigen(out).noalias() = as_eigen(a) * as_eigen(b).transpose();
    return out;
}

DenseMatrix gram_matrix(const DenseMatrix& x) {
    const std::size_t d = x.cols();
    DenseMatrix out(d, d);
    auto map = as_eigen(out);
    map.template selfadjointView<Eigen::Lower>().rankUpdate(as_eigen(x).transpose());
    // Mirror the computed lower triangle so the result is exactly symmetric.
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = r + 1; c < d; ++c) {
            out(r, c) = out(c, r);
        }
    }
    return out;
}

DenseMatrix symmetrized(const DenseMatrix& a) {
    if (a.rows() != a.cols()) {
        throw DimensionMismatch("symmetrized: matrix is not square");
    }
    DenseMatrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            out(r, c) = 0.5 * (a(r, c) + a(c, r));
        }
    }
    return out;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

} // namespace concil
