// SPDX-License-Identifier: Apache-2.0
#include "concil/expansion.hpp"

#include <string>

#include "concil/errors.hpp"
#include "concil/rng.hpp"

namespace concil {

namespace {

// Fill a rows x cols block at (row0, col0) with scale * N(0,1) deviates,
// drawn row-major from a fresh stream.
void fill_normal_block(DenseMatrix& weight, std::size_t row0, std::size_t col0,
                       std::size_t rows, std::size_t cols, std::uint64_t seed,
                       double scale) {
    NormalStream stream(seed);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            weight(row0 + r, col0 + c) = scale * stream.next();
        }
    }
}

} // namespace

ExpansionLayer new_expansion(std::size_t in_dim, std::size_t out_dim,
                             std::uint64_t seed, double scale) {
    if (in_dim < 1 || out_dim < 1) {
        throw ConfigError("new_expansion: dimensions must be >= 1");
    }
    if (!(scale > 0.0)) {
        throw ConfigError("new_expansion: scale must be positive");
    }
    ExpansionLayer layer;
    layer.weight_ = DenseMatrix(in_dim, out_dim);
    fill_normal_block(layer.weight_, 0, 0, in_dim, out_dim, seed, scale);
    layer.seed_ = seed;
    layer.scale_ = scale;
    layer.base_in_ = in_dim;
    layer.base_out_ = out_dim;
    return layer;
}

DenseMatrix expand(const ExpansionLayer& layer, const DenseMatrix& inputs) {
    if (inputs.cols() != layer.in_dim()) {
        throw DimensionMismatch("expand: inputs have " + std::to_string(inputs.cols()) +
                                " columns but layer expects " +
                                std::to_string(layer.in_dim()));
    }
    // Plain k-ascending accumulation. The growth contract promises
    // bit-identical old coordinates and exact zeros on new ones for old data;
    // a fixed scalar summation order makes that promise portable, where a
    // blocked BLAS-style product would not.
    const DenseMatrix& w = layer.weight();
    DenseMatrix out(inputs.rows(), w.cols());
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < inputs.cols(); ++k) {
                sum += inputs(i, k) * w(k, j);
            }
            out(i, j) = sum < 0.0 ? 0.0 : sum;
        }
    }
    return out;
}

ExpansionLayer grow(const ExpansionLayer& layer, std::size_t new_in_rows,
                    std::size_t new_out_cols, std::uint64_t sub_seed) {
    ExpansionLayer grown = layer;
    grown.growth_.push_back(GrowthRecord{layer.growth_.size() + 1, new_in_rows,
                                         new_out_cols, sub_seed});
    if (new_in_rows == 0 && new_out_cols == 0) {
        return grown;
    }
    const std::size_t old_in = layer.in_dim();
    const std::size_t old_out = layer.out_dim();
    // Old block preserved bit-exactly; the off-diagonal blocks stay zero.
    grown.weight_ = layer.weight().padded(old_in + new_in_rows, old_out + new_out_cols);
    fill_normal_block(grown.weight_, old_in, old_out, new_in_rows, new_out_cols,
                      sub_seed, layer.scale());
    return grown;
}

ExpansionLayer replay_expansion(std::size_t base_in, std::size_t base_out,
                                std::uint64_t seed, double scale,
                                const std::vector<GrowthRecord>& history) {
    ExpansionLayer layer = new_expansion(base_in, base_out, seed, scale);
    for (const GrowthRecord& record : history) {
        layer = grow(layer, record.added_in_rows, record.added_out_cols, record.sub_seed);
    }
    return layer;
}

} // namespace concil
