// SPDX-License-Identifier: Apache-2.0
#pragma once

// The incremental learner: analytic base-phase fit, exact recursive per-phase
// updates of the concept head and the classifier head, and inference.
//
// The model keeps two sufficient statistics, the inverse correlation matrices
// of the two regression stages, and never stores past data. Weight updates
// use the full recursive-least-squares form
//
//     W <- W + R Z^T (C - Z W)
//
// which keeps the recursively updated weights exactly equal to the
// closed-form joint ridge fit over every phase seen so far (old samples
// zero-padded on coordinates that did not exist when they arrived). When the
// new batch carries all-zero labels for old output columns - the
// disjoint-class case - the correction term R Z^T C_old vanishes and this
// reduces to the two-block special form [W - R Z^T Z W | R Z^T C_new].
//
// Phase indexing is 0-based throughout (phase 0 is the base fit).

#include <cstdint>
#include <optional>
#include <vector>

#include "concil/expansion.hpp"
#include "concil/matrix.hpp"

namespace concil {

struct EngineConfig {
    double lambda1 = 500.0; // concept-stage ridge regularizer
    double lambda2 = 1.0;   // class-stage ridge regularizer
    std::size_t backbone_expansion_dim = 25000;
    std::size_t concept_expansion_dim = 25000;
    std::uint64_t backbone_seed = 1;
    std::uint64_t concept_seed = 2;
    // Standard deviation of expansion weights; defaults to 1/sqrt(in_dim).
    std::optional<double> expansion_scale;
    // Expanded-concept columns appended per growing phase; defaults to
    // ceil(concept_expansion_dim * new_concepts / base_concepts).
    std::optional<std::size_t> growth_out_per_phase;

    void validate() const; // throws ConfigError
};

// One phase of training or test data. Column identity travels with the
// matrices: concepts carries the global ids of its columns (old ids may
// reappear, new ids extend the cumulative set), classes is one-hot over this
// phase's class ids, which must be disjoint from every earlier phase.
struct PhaseBatch {
    DenseMatrix features; // N x d_z raw backbone features
    DenseMatrix concepts; // N x |concept_col_ids|, binary
    std::vector<std::int64_t> concept_col_ids;
    DenseMatrix classes; // N x |class_col_ids|, one-hot rows
    std::vector<std::int64_t> class_col_ids;

    std::size_t sample_count() const { return features.rows(); }
    void validate() const; // shape + binary/one-hot checks
};

struct ModelState {
    ExpansionLayer backbone_expansion; // d_z -> d_z*, never grows
    ExpansionLayer concept_expansion;  // L_t -> d_C*, grows with new concepts
    DenseMatrix concept_weights;       // W_c, d_z* x L_t
    DenseMatrix class_weights;         // W_y, d_C* x Y_t
    DenseMatrix concept_inverse_corr;  // R_c, d_z* x d_z*
    DenseMatrix class_inverse_corr;    // R_y, d_C* x d_C*
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::optional<std::size_t> growth_out_per_phase;
    std::vector<std::int64_t> concept_ids; // append-only across phases
    std::vector<std::int64_t> class_ids;   // append-only across phases
    std::size_t phase = 0;

    bool operator==(const ModelState&) const = default;
};

// Decision rules, fixed and documented: a concept is predicted present when
// its raw score exceeds 0.5; the class decision is the argmax over class
// scores with ties broken toward the lowest column index.
struct Prediction {
    DenseMatrix concept_scores;    // N x L_total
    DenseMatrix concept_decisions; // N x L_total, entries 0 or 1
    DenseMatrix class_scores;      // N x Y_total
    std::vector<std::size_t> class_decisions; // argmax column per row
};

// Analytic fit on the base phase (phase 0).
ModelState base_fit(const PhaseBatch& batch, const EngineConfig& config);

// Folds one incremental phase into the model: aligns concept columns,
// updates R_c and W_c, grows the concept expansion when new concepts arrive,
// extends and updates R_y and W_y, increments the phase index.
ModelState phase_update(const ModelState& state, const PhaseBatch& batch);

// features -> concept scores -> class scores, with decisions.
Prediction predict(const ModelState& state, const DenseMatrix& features);

namespace detail {
// Shared inference path for any (expansion, weights) pair, used by both the
// incremental learner and the refit-only baseline.
Prediction predict_heads(const ExpansionLayer& backbone, const ExpansionLayer& concept_layer,
                         const DenseMatrix& concept_weights, const DenseMatrix& class_weights,
                         const DenseMatrix& features);

// Appends ids from `incoming` that are absent from `known` (preserving
// incoming order) and returns the column index of every incoming id in the
// extended id list.
std::vector<std::size_t> align_ids(std::vector<std::int64_t>& known,
                                   const std::vector<std::int64_t>& incoming);

// Re-indexes `batch_columns` (one column per incoming id) into a zero-filled
// N x total_cols matrix using the column map from align_ids. Columns never
// mentioned by the batch keep target zero.
DenseMatrix complete_columns(const DenseMatrix& batch_columns,
                             const std::vector<std::size_t>& column_map,
                             std::size_t total_cols);

// Growth rule: explicit override, else ceil(base_out * new_count / base_in).
std::size_t growth_columns(const ExpansionLayer& layer,
                           std::optional<std::size_t> override_value,
                           std::size_t new_concepts);
} // namespace detail

} // namespace concil
