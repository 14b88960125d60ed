// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace concil {

// Dense row-major matrix of 64-bit floats. The universal carrier for
// features, labels, weights and correlation matrices. Element storage is
// contiguous, row-major, length rows()*cols().
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static DenseMatrix identity(std::size_t n);
    // n x n diagonal matrix with `value` on the diagonal.
    static DenseMatrix scaled_identity(std::size_t n, double value);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    bool all_finite() const;
    double max_abs() const;
    double frobenius_norm() const;

    // Copy of this matrix placed in the top-left corner of a new_rows x
    // new_cols zero matrix. Dimensions must not shrink.
    DenseMatrix padded(std::size_t new_rows, std::size_t new_cols) const;

    DenseMatrix transposed() const;

    void add_scaled_identity(double value);

    // Exact element-wise equality (bitwise on the stored doubles).
    bool operator==(const DenseMatrix& other) const;
    bool operator!=(const DenseMatrix& other) const { return !(*this == other); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double scalar, const DenseMatrix& a);

// A^T * B without materializing the transpose.
DenseMatrix transpose_multiply(const DenseMatrix& a, const DenseMatrix& b);
// A * B^T without materializing the transpose.
DenseMatrix multiply_transpose(const DenseMatrix& a, const DenseMatrix& b);
// X^T * X, exactly symmetric by construction.
DenseMatrix gram_matrix(const DenseMatrix& x);
// (A + A^T) / 2.
DenseMatrix symmetrized(const DenseMatrix& a);

// Largest |a_ij - b_ij|; matrices must share shape.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

} // namespace concil
