// SPDX-License-Identifier: Apache-2.0
#pragma once

// The forgetting foil: a learner with the same architecture and growth rules
// as the incremental engine, but whose heads are refit by plain ridge
// regression on the CURRENT phase's batch alone. It keeps no inverse
// correlation matrices and no memory of earlier data, so classes absent from
// the current batch collapse to zero weight columns.

#include <cstdint>
#include <optional>
#include <vector>

#include "concil/engine.hpp"
#include "concil/expansion.hpp"
#include "concil/matrix.hpp"

namespace concil {

struct BaselineState {
    ExpansionLayer backbone_expansion;
    ExpansionLayer concept_expansion;
    DenseMatrix concept_weights; // W_c, d_z* x L_t
    DenseMatrix class_weights;   // W_y, d_C* x Y_t
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::optional<std::size_t> growth_out_per_phase;
    std::vector<std::int64_t> concept_ids;
    std::vector<std::int64_t> class_ids;
    std::size_t phase = 0;

    bool operator==(const BaselineState&) const = default;
};

// Phase 0: the analytic base fit with the inverse correlation matrices
// dropped; weights are bit-identical to base_fit's.
BaselineState baseline_base_fit(const PhaseBatch& batch, const EngineConfig& config);

// Refits both heads on `batch` only. Column bookkeeping, expansion growth,
// and seed derivation mirror phase_update exactly, so a baseline and an
// engine driven by the same stream share identical expansion layers.
// Throws EmptyBatch when the batch has no samples.
BaselineState baseline_phase_fit(const BaselineState& state, const PhaseBatch& batch);

Prediction predict(const BaselineState& state, const DenseMatrix& features);

} // namespace concil
