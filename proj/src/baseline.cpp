// SPDX-License-Identifier: Apache-2.0
#include "concil/baseline.hpp"

#include <sstream>

#include "concil/errors.hpp"
#include "concil/linalg.hpp"
#include "concil/rng.hpp"

namespace concil {

BaselineState baseline_base_fit(const PhaseBatch& batch, const EngineConfig& config) {
    ModelState model = base_fit(batch, config);
    BaselineState state;
    state.backbone_expansion = std::move(model.backbone_expansion);
    state.concept_expansion = std::move(model.concept_expansion);
    state.concept_weights = std::move(model.concept_weights);
    state.class_weights = std::move(model.class_weights);
    state.lambda1 = model.lambda1;
    state.lambda2 = model.lambda2;
    state.growth_out_per_phase = model.growth_out_per_phase;
    state.concept_ids = std::move(model.concept_ids);
    state.class_ids = std::move(model.class_ids);
    state.phase = model.phase;
    return state;
}

BaselineState baseline_phase_fit(const BaselineState& state, const PhaseBatch& batch) {
    batch.validate();
    if (batch.sample_count() == 0)
        throw EmptyBatch("baseline refit needs at least one sample in the phase batch");
    if (batch.features.cols() != state.backbone_expansion.in_dim()) {
        std::ostringstream msg;
        msg << "phase batch has " << batch.features.cols() << " feature columns, model expects "
            << state.backbone_expansion.in_dim();
        throw DimensionMismatch(msg.str());
    }
    for (std::int64_t id : batch.class_col_ids)
        for (std::int64_t known : state.class_ids)
            if (id == known) {
                std::ostringstream msg;
                msg << "class id " << id << " was already introduced in an earlier phase";
                throw DisjointClassViolation(msg.str());
            }

    BaselineState next = state;
    next.phase = state.phase + 1;

    std::size_t old_concepts = next.concept_ids.size();
    std::vector<std::size_t> concept_map = detail::align_ids(next.concept_ids, batch.concept_col_ids);
    std::size_t total_concepts = next.concept_ids.size();
    std::size_t new_concepts = total_concepts - old_concepts;
    DenseMatrix concept_targets =
        detail::complete_columns(batch.concepts, concept_map, total_concepts);

    DenseMatrix expanded = expand(next.backbone_expansion, batch.features);
    next.concept_weights = ridge_fit({expanded, concept_targets, state.lambda1});

    if (new_concepts > 0) {
        std::size_t growth = detail::growth_columns(state.concept_expansion,
                                                    state.growth_out_per_phase, new_concepts);
        std::uint64_t sub_seed = derive_seed(state.concept_expansion.seed(), next.phase);
        next.concept_expansion = grow(state.concept_expansion, new_concepts, growth, sub_seed);
    }

    std::vector<std::size_t> class_map = detail::align_ids(next.class_ids, batch.class_col_ids);
    DenseMatrix class_targets =
        detail::complete_columns(batch.classes, class_map, next.class_ids.size());
    DenseMatrix concept_scores = expanded * next.concept_weights;
    DenseMatrix concept_expanded = expand(next.concept_expansion, concept_scores);
    next.class_weights = ridge_fit({concept_expanded, class_targets, state.lambda2});
    return next;
}

Prediction predict(const BaselineState& state, const DenseMatrix& features) {
    if (features.cols() != state.backbone_expansion.in_dim()) {
        std::ostringstream msg;
        msg << "prediction features have " << features.cols() << " columns, model expects "
            << state.backbone_expansion.in_dim();
        throw DimensionMismatch(msg.str());
    }
    return detail::predict_heads(state.backbone_expansion, state.concept_expansion,
                                 state.concept_weights, state.class_weights, features);
}

} // namespace concil
