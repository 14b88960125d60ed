// SPDX-License-Identifier: Apache-2.0
#pragma once

// Stream construction for class- and concept-incremental runs: phase
// schedules over a labeled feature table, deterministic per-phase slicing
// with a seeded train/test split, and a seeded synthetic dataset generator
// for desk-scale experiments.
//
// Schedules speak in ordinals: class ordinal k means the k-th distinct class
// id of the dataset in ascending order, concept ordinal j means the j-th
// concept column of the table. slice_phase translates ordinals to the
// dataset's native ids.

#include <cstdint>
#include <utility>
#include <vector>

#include "concil/engine.hpp"
#include "concil/matrix.hpp"

namespace concil {

// In-memory labeled feature table: one row per sample, binary concept
// annotations over every concept column, one integer class label per row.
struct LabeledDataset {
    DenseMatrix features; // N x d_z
    DenseMatrix concepts; // N x L, binary
    std::vector<std::int64_t> class_labels;       // N entries
    std::vector<std::int64_t> concept_column_ids; // L entries, native order

    std::size_t sample_count() const { return features.rows(); }
    void validate() const;
    bool operator==(const LabeledDataset&) const = default;
};

// Phase plan. per_phase_classes[t] / per_phase_concepts[t] hold the ordinals
// INTRODUCED at phase t; the visible set at t is the union over phases 0..t.
// Class sets are pairwise disjoint; concept sets only ever grow.
struct CicilSchedule {
    double n_frac = 0.5; // base-phase class fraction
    double m_frac = 0.5; // base-phase concept fraction
    std::size_t p = 1;   // phase count
    std::vector<std::vector<std::size_t>> per_phase_classes;
    std::vector<std::vector<std::size_t>> per_phase_concepts;

    std::vector<std::size_t> visible_concepts(std::size_t t) const; // union 0..t
    bool operator==(const CicilSchedule&) const = default;
};

// Train/test split policy applied inside each phase slice.
struct SplitSpec {
    double train_ratio = 0.5;
    std::uint64_t seed = 51;
};

// Synthetic dataset description. Defaults are the desk-scale benchmark; an
// empty concept_class_map is replaced by default_concept_class_map at
// generation time.
struct SyntheticSpec {
    std::size_t feature_dim = 16;
    std::size_t classes = 10;
    std::size_t concepts = 12;
    std::size_t samples_per_class = 40;
    std::uint64_t seed = 7;
    double noise_sigma = 0.01;
    DenseMatrix concept_class_map; // classes x concepts, binary

    bool operator==(const SyntheticSpec&) const = default;
};

// Base phase takes the first ceil(n_frac * K) classes and the first
// ceil(m_frac * L) concepts; the remainder splits as evenly as possible over
// phases 1..p-1, earlier phases absorbing the remainder. Every incremental
// phase must receive at least one class; concept-free phases are allowed.
// Throws ConfigError on infeasible arguments.
CicilSchedule build_schedule(std::size_t class_count, std::size_t concept_count, double n_frac,
                             double m_frac, std::size_t p);

// Extracts phase t: samples of that phase's classes, concept columns
// restricted to the concepts visible by t, one-hot class targets over the
// phase's own classes. Per class, the first round(ratio * count) samples of
// a seeded shuffle train, the rest test. Throws PhaseOutOfRange for t >= p.
std::pair<PhaseBatch, PhaseBatch> slice_phase(const LabeledDataset& dataset,
                                              const CicilSchedule& schedule, std::size_t t,
                                              const SplitSpec& split = SplitSpec{});

// Checks a synthetic description without generating anything; an empty
// concept_class_map passes (the default map substitutes for it later).
// Throws ConfigError on the first violation.
void validate_synthetic(const SyntheticSpec& spec);

// Deterministic table: class i's samples are its binary concept vector times
// a seeded mixing matrix plus Normal(0, noise_sigma^2) noise. Rows are
// class-major, labels 0..K-1, concept columns 0..L-1.
LabeledDataset generate_synthetic(const SyntheticSpec& spec);

// Distinct, covering concept vectors: sliding windows over the concept axis
// when concepts >= classes, binary codes otherwise. Every class activates at
// least one concept and no two classes share a vector.
DenseMatrix default_concept_class_map(std::size_t classes, std::size_t concepts);

} // namespace concil
