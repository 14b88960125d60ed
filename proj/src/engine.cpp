// SPDX-License-Identifier: Apache-2.0
#include "concil/engine.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "concil/errors.hpp"
#include "concil/linalg.hpp"
#include "concil/rng.hpp"

namespace concil {

namespace {

double default_scale(std::size_t in_dim) { return 1.0 / std::sqrt(static_cast<double>(in_dim)); }

void require_binary(const DenseMatrix& m, const char* what) {
    for (double v : m.values()) {
        if (v != 0.0 && v != 1.0) {
            std::ostringstream msg;
            msg << what << " entries must be 0 or 1, found " << v;
            throw ConfigError(msg.str());
        }
    }
}

void require_one_hot_rows(const DenseMatrix& m, const char* what) {
    require_binary(m, what);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) sum += m(r, c);
        if (sum != 1.0) {
            std::ostringstream msg;
            msg << what << " rows must be one-hot, row " << r << " sums to " << sum;
            throw ConfigError(msg.str());
        }
    }
}

void require_distinct(const std::vector<std::int64_t>& ids, const char* what) {
    std::unordered_set<std::int64_t> seen;
    for (std::int64_t id : ids) {
        if (!seen.insert(id).second) {
            std::ostringstream msg;
            msg << what << " contains duplicate id " << id;
            throw ConfigError(msg.str());
        }
    }
}

// W <- W_prior + R Z^T (T - Z W_prior), the full recursive-least-squares
// correction shared by both heads.
DenseMatrix rls_weight_update(const DenseMatrix& prior, const DenseMatrix& inverse_corr,
                              const DenseMatrix& design, const DenseMatrix& targets) {
    DenseMatrix residual = targets - design * prior;
    return prior + inverse_corr * transpose_multiply(design, residual);
}

// blockdiag(R, (1/lambda) I_extra): the prior-only inverse correlation for
// the freshly appended, not-yet-observed coordinates.
DenseMatrix extend_inverse_corr(const DenseMatrix& r, std::size_t extra, double lambda) {
    if (extra == 0) return r;
    DenseMatrix extended = r.padded(r.rows() + extra, r.cols() + extra);
    double prior = 1.0 / lambda;
    for (std::size_t i = r.rows(); i < extended.rows(); ++i) extended(i, i) = prior;
    return extended;
}

} // namespace

void EngineConfig::validate() const {
    if (!(lambda1 > 0.0) || !std::isfinite(lambda1))
        throw ConfigError("lambda1 must be positive and finite");
    if (!(lambda2 > 0.0) || !std::isfinite(lambda2))
        throw ConfigError("lambda2 must be positive and finite");
    if (backbone_expansion_dim == 0) throw ConfigError("backbone_expansion_dim must be at least 1");
    if (concept_expansion_dim == 0) throw ConfigError("concept_expansion_dim must be at least 1");
    if (expansion_scale && (!(*expansion_scale > 0.0) || !std::isfinite(*expansion_scale)))
        throw ConfigError("expansion_scale must be positive and finite");
}

void PhaseBatch::validate() const {
    if (concepts.rows() != features.rows() || classes.rows() != features.rows()) {
        std::ostringstream msg;
        msg << "batch row counts disagree: features " << features.rows() << ", concepts "
            << concepts.rows() << ", classes " << classes.rows();
        throw DimensionMismatch(msg.str());
    }
    if (concepts.cols() != concept_col_ids.size())
        throw DimensionMismatch("concept matrix width does not match concept_col_ids");
    if (classes.cols() != class_col_ids.size())
        throw DimensionMismatch("class matrix width does not match class_col_ids");
    require_distinct(concept_col_ids, "concept_col_ids");
    require_distinct(class_col_ids, "class_col_ids");
    require_binary(concepts, "concept");
    require_one_hot_rows(classes, "class");
}

namespace detail {

std::vector<std::size_t> align_ids(std::vector<std::int64_t>& known,
                                   const std::vector<std::int64_t>& incoming) {
    std::unordered_map<std::int64_t, std::size_t> index;
    index.reserve(known.size());
    for (std::size_t i = 0; i < known.size(); ++i) index.emplace(known[i], i);
    std::vector<std::size_t> map;
    map.reserve(incoming.size());
    for (std::int64_t id : incoming) {
        auto it = index.find(id);
        if (it == index.end()) {
            it = index.emplace(id, known.size()).first;
            known.push_back(id);
        }
        map.push_back(it->second);
    }
    return map;
}

DenseMatrix complete_columns(const DenseMatrix& batch_columns,
                             const std::vector<std::size_t>& column_map, std::size_t total_cols) {
    DenseMatrix full(batch_columns.rows(), total_cols);
    for (std::size_t j = 0; j < column_map.size(); ++j) {
        for (std::size_t r = 0; r < batch_columns.rows(); ++r)
            full(r, column_map[j]) = batch_columns(r, j);
    }
    return full;
}

std::size_t growth_columns(const ExpansionLayer& layer, std::optional<std::size_t> override_value,
                           std::size_t new_concepts) {
    if (override_value) return *override_value;
    std::size_t base_in = layer.base_in_dim();
    std::size_t base_out = layer.base_out_dim();
    return (base_out * new_concepts + base_in - 1) / base_in;
}

Prediction predict_heads(const ExpansionLayer& backbone, const ExpansionLayer& concept_layer,
                         const DenseMatrix& concept_weights, const DenseMatrix& class_weights,
                         const DenseMatrix& features) {
    Prediction out;
    DenseMatrix expanded = expand(backbone, features);
    out.concept_scores = expanded * concept_weights;
    out.concept_decisions = DenseMatrix(out.concept_scores.rows(), out.concept_scores.cols());
    for (std::size_t r = 0; r < out.concept_scores.rows(); ++r)
        for (std::size_t c = 0; c < out.concept_scores.cols(); ++c)
            out.concept_decisions(r, c) = out.concept_scores(r, c) > 0.5 ? 1.0 : 0.0;
    DenseMatrix concept_expanded = expand(concept_layer, out.concept_scores);
    out.class_scores = concept_expanded * class_weights;
    out.class_decisions.resize(out.class_scores.rows(), 0);
    for (std::size_t r = 0; r < out.class_scores.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < out.class_scores.cols(); ++c)
            if (out.class_scores(r, c) > out.class_scores(r, best)) best = c;
        out.class_decisions[r] = best;
    }
    return out;
}

} // namespace detail

ModelState base_fit(const PhaseBatch& batch, const EngineConfig& config) {
    config.validate();
    batch.validate();
    std::size_t feature_dim = batch.features.cols();
    std::size_t concept_dim = batch.concept_col_ids.size();
    if (feature_dim == 0) throw ConfigError("base phase needs at least one feature column");
    if (concept_dim == 0) throw ConfigError("base phase needs at least one concept column");

    ModelState state;
    state.lambda1 = config.lambda1;
    state.lambda2 = config.lambda2;
    state.growth_out_per_phase = config.growth_out_per_phase;
    state.concept_ids = batch.concept_col_ids;
    state.class_ids = batch.class_col_ids;
    state.phase = 0;

    double backbone_scale = config.expansion_scale.value_or(default_scale(feature_dim));
    state.backbone_expansion = new_expansion(feature_dim, config.backbone_expansion_dim,
                                             config.backbone_seed, backbone_scale);
    DenseMatrix expanded = expand(state.backbone_expansion, batch.features);
    state.concept_inverse_corr = inverse_correlation(expanded, config.lambda1);
    state.concept_weights = ridge_fit({expanded, batch.concepts, config.lambda1});

    DenseMatrix concept_scores = expanded * state.concept_weights;
    double concept_scale = config.expansion_scale.value_or(default_scale(concept_dim));
    state.concept_expansion = new_expansion(concept_dim, config.concept_expansion_dim,
                                            config.concept_seed, concept_scale);
    DenseMatrix concept_expanded = expand(state.concept_expansion, concept_scores);
    state.class_inverse_corr = inverse_correlation(concept_expanded, config.lambda2);
    state.class_weights = ridge_fit({concept_expanded, batch.classes, config.lambda2});
    return state;
}

ModelState phase_update(const ModelState& state, const PhaseBatch& batch) {
    batch.validate();
    if (batch.features.cols() != state.backbone_expansion.in_dim()) {
        std::ostringstream msg;
        msg << "phase batch has " << batch.features.cols() << " feature columns, model expects "
            << state.backbone_expansion.in_dim();
        throw DimensionMismatch(msg.str());
    }
    for (std::int64_t id : batch.class_col_ids) {
        for (std::int64_t known : state.class_ids) {
            if (id == known) {
                std::ostringstream msg;
                msg << "class id " << id << " was already introduced in an earlier phase";
                throw DisjointClassViolation(msg.str());
            }
        }
    }

    ModelState next = state;
    next.phase = state.phase + 1;

    // Concept head: align ids, complete unseen columns with zero targets,
    // fold the batch into R_c, then apply the full RLS correction.
    std::size_t old_concepts = next.concept_ids.size();
    std::vector<std::size_t> concept_map = detail::align_ids(next.concept_ids, batch.concept_col_ids);
    std::size_t total_concepts = next.concept_ids.size();
    std::size_t new_concepts = total_concepts - old_concepts;
    DenseMatrix concept_targets =
        detail::complete_columns(batch.concepts, concept_map, total_concepts);

    DenseMatrix expanded = expand(next.backbone_expansion, batch.features);
    next.concept_inverse_corr = woodbury_update(state.concept_inverse_corr, expanded);
    DenseMatrix concept_prior =
        state.concept_weights.padded(state.concept_weights.rows(), total_concepts);
    next.concept_weights =
        rls_weight_update(concept_prior, next.concept_inverse_corr, expanded, concept_targets);

    // New concept coordinates extend the concept expansion block-diagonally,
    // so every earlier phase's expanded design is unchanged on old columns
    // and exactly zero on new ones.
    std::size_t growth = 0;
    if (new_concepts > 0) {
        growth = detail::growth_columns(state.concept_expansion, state.growth_out_per_phase,
                                        new_concepts);
        std::uint64_t sub_seed = derive_seed(state.concept_expansion.seed(), next.phase);
        next.concept_expansion = grow(state.concept_expansion, new_concepts, growth, sub_seed);
    }

    // Class head: ids are disjoint by construction, so old target columns are
    // zero for this batch and new ones are zero for all earlier batches.
    std::size_t old_classes = next.class_ids.size();
    std::vector<std::size_t> class_map = detail::align_ids(next.class_ids, batch.class_col_ids);
    std::size_t total_classes = next.class_ids.size();
    (void)old_classes;
    DenseMatrix class_targets = detail::complete_columns(batch.classes, class_map, total_classes);

    DenseMatrix concept_scores = expanded * next.concept_weights;
    DenseMatrix concept_expanded = expand(next.concept_expansion, concept_scores);
    DenseMatrix extended_corr =
        extend_inverse_corr(state.class_inverse_corr, growth, state.lambda2);
    next.class_inverse_corr = woodbury_update(extended_corr, concept_expanded);
    DenseMatrix class_prior =
        state.class_weights.padded(state.class_weights.rows() + growth, total_classes);
    next.class_weights =
        rls_weight_update(class_prior, next.class_inverse_corr, concept_expanded, class_targets);
    return next;
}

Prediction predict(const ModelState& state, const DenseMatrix& features) {
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
