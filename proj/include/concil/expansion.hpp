// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seeded random feature expansion: a fixed projection drawn from
// Normal(0, scale^2) followed by a rectifier. Layers are immutable values;
// growth returns a new layer.
//
// Growth couples old and new coordinates through a block-diagonal scheme:
// appended input rows carry zero weight in every pre-existing output column,
// and appended output columns carry fresh random weight only in the appended
// input rows. Inputs that are zero on the appended coordinates therefore
// produce bit-identical values on old output columns and exact zeros on new
// ones, which is the structural property the incremental learner's
// exact-equivalence guarantee rests on.
//
// Weight streams come from the documented generator in rng.hpp: the base
// block is drawn row-major from NormalStream(seed) and scaled, and each
// growth block is drawn row-major from NormalStream(sub_seed) with the
// layer's creation-time scale. Replaying (seed, scale, base dims, growth
// records) reconstructs a layer bit-exactly.

#include <cstdint>
#include <vector>

#include "concil/matrix.hpp"

namespace concil {

// One structural growth event. The full history, together with the base
// seed and dims, determines the current weight matrix.
struct GrowthRecord {
    std::size_t phase = 0; // 1-based growth sequence position
    std::size_t added_in_rows = 0;
    std::size_t added_out_cols = 0;
    std::uint64_t sub_seed = 0;

    bool operator==(const GrowthRecord&) const = default;
};

class ExpansionLayer {
public:
    ExpansionLayer() = default;

    std::size_t in_dim() const { return weight_.rows(); }
    std::size_t out_dim() const { return weight_.cols(); }
    std::size_t base_in_dim() const { return base_in_; }
    std::size_t base_out_dim() const { return base_out_; }
    std::uint64_t seed() const { return seed_; }
    double scale() const { return scale_; }
    const DenseMatrix& weight() const { return weight_; }
    const std::vector<GrowthRecord>& growth_history() const { return growth_; }

    bool operator==(const ExpansionLayer&) const = default;

private:
    friend ExpansionLayer new_expansion(std::size_t, std::size_t, std::uint64_t, double);
    friend ExpansionLayer grow(const ExpansionLayer&, std::size_t, std::size_t, std::uint64_t);

    DenseMatrix weight_; // in_dim x out_dim
    std::uint64_t seed_ = 0;
    double scale_ = 1.0;
    std::size_t base_in_ = 0;
    std::size_t base_out_ = 0;
    std::vector<GrowthRecord> growth_;
};

// Fresh layer with weights drawn i.i.d. from Normal(0, scale^2).
// in_dim and out_dim must be >= 1 and scale > 0.
ExpansionLayer new_expansion(std::size_t in_dim, std::size_t out_dim,
                             std::uint64_t seed, double scale);

// max(0, inputs * weight); inputs is N x in_dim.
DenseMatrix expand(const ExpansionLayer& layer, const DenseMatrix& inputs);

// New layer with new_in_rows appended input rows and new_out_cols appended
// output columns (see the block-diagonal coupling described above).
ExpansionLayer grow(const ExpansionLayer& layer, std::size_t new_in_rows,
                    std::size_t new_out_cols, std::uint64_t sub_seed);

// Reconstructs a layer from its creation arguments and growth history.
ExpansionLayer replay_expansion(std::size_t base_in, std::size_t base_out,
                                std::uint64_t seed, double scale,
                                const std::vector<GrowthRecord>& history);

} // namespace concil
