// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "concil/engine.hpp"
#include "concil/errors.hpp"
#include "concil/experiment.hpp"
#include "concil/harness.hpp"
#include "doctest.h"
#include "oracles.hpp"

using concil::CicilSchedule;
using concil::DenseMatrix;
using concil::LabeledDataset;
using concil::PhaseBatch;
using concil::SyntheticSpec;

TEST_CASE("the half-and-half two-phase schedule over 50 classes and 85 concepts") {
    const CicilSchedule schedule = concil::build_schedule(50, 85, 0.5, 0.5, 2);
    REQUIRE(schedule.per_phase_classes.size() == 2);
    CHECK(schedule.per_phase_classes[0].size() == 25);
    CHECK(schedule.per_phase_classes[1].size() == 25);
    CHECK(schedule.per_phase_concepts[0].size() == 43);
    CHECK(schedule.per_phase_concepts[1].size() == 42);
    CHECK(schedule.per_phase_classes[0].front() == 0);
    CHECK(schedule.per_phase_classes[1].front() == 25);
}

TEST_CASE("a single-phase schedule holds everything in the base phase") {
    const CicilSchedule schedule = concil::build_schedule(10, 12, 0.5, 0.5, 1);
    CHECK(schedule.per_phase_classes[0].size() == 10);
    CHECK(schedule.per_phase_concepts[0].size() == 12);
}

TEST_CASE("phase counts beyond the class budget are rejected") {
    // 10 classes, half in the base phase: five phases of one class each fit,
    CHECK_NOTHROW((void)concil::build_schedule(10, 12, 0.5, 0.5, 6));
    // six do not.
    CHECK_THROWS_AS((void)concil::build_schedule(10, 12, 0.5, 0.5, 7), concil::ConfigError);
}

TEST_CASE("schedule argument validation") {
    CHECK_THROWS_AS((void)concil::build_schedule(10, 12, 0.5, 0.5, 0), concil::ConfigError);
    CHECK_THROWS_AS((void)concil::build_schedule(0, 12, 0.5, 0.5, 1), concil::ConfigError);
    CHECK_THROWS_AS((void)concil::build_schedule(10, 0, 0.5, 0.5, 1), concil::ConfigError);
    CHECK_THROWS_AS((void)concil::build_schedule(10, 12, 0.0, 0.5, 2), concil::ConfigError);
    CHECK_THROWS_AS((void)concil::build_schedule(10, 12, 1.2, 0.5, 2), concil::ConfigError);
    CHECK_THROWS_AS((void)concil::build_schedule(10, 12, 1.0, 0.5, 2), concil::ConfigError);
    CHECK_NOTHROW((void)concil::build_schedule(10, 12, 1.0, 1.0, 1));
}

TEST_CASE("schedules partition the classes and exhaust the concepts") {
    const CicilSchedule schedule = concil::build_schedule(23, 17, 0.3, 0.25, 4);
    std::vector<std::size_t> classes, concepts;
    for (std::size_t t = 0; t < schedule.p; ++t) {
        classes.insert(classes.end(), schedule.per_phase_classes[t].begin(),
                       schedule.per_phase_classes[t].end());
        concepts.insert(concepts.end(), schedule.per_phase_concepts[t].begin(),
                        schedule.per_phase_concepts[t].end());
        CHECK(!schedule.per_phase_classes[t].empty());
    }
    std::sort(classes.begin(), classes.end());
    std::sort(concepts.begin(), concepts.end());
    for (std::size_t i = 0; i < 23; ++i) CHECK(classes[i] == i);
    REQUIRE(concepts.size() == 17);
    for (std::size_t i = 0; i < 17; ++i) CHECK(concepts[i] == i);
    // visible sets are nested
    std::size_t prev = 0;
    for (std::size_t t = 0; t < schedule.p; ++t) {
        const std::vector<std::size_t> visible = schedule.visible_concepts(t);
        CHECK(visible.size() >= prev);
        prev = visible.size();
    }
    CHECK(schedule.visible_concepts(3).size() == 17);
    CHECK_THROWS_AS((void)schedule.visible_concepts(4), concil::PhaseOutOfRange);
}

TEST_CASE("synthetic generation is deterministic and class-major") {
    SyntheticSpec spec;
    spec.classes = 4;
    spec.concepts = 6;
    spec.samples_per_class = 5;
    spec.feature_dim = 8;
    const LabeledDataset a = concil::generate_synthetic(spec);
    const LabeledDataset b = concil::generate_synthetic(spec);
    CHECK(a == b);
    REQUIRE(a.sample_count() == 20);
    for (std::size_t r = 0; r < 20; ++r) CHECK(a.class_labels[r] == static_cast<std::int64_t>(r / 5));
    spec.seed = 8;
    const LabeledDataset c = concil::generate_synthetic(spec);
    CHECK(a.features != c.features);
}

TEST_CASE("zero noise collapses each class to one repeated feature row") {
    SyntheticSpec spec;
    spec.classes = 3;
    spec.concepts = 5;
    spec.samples_per_class = 4;
    spec.feature_dim = 6;
    spec.noise_sigma = 0.0;
    const LabeledDataset table = concil::generate_synthetic(spec);
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t first = i * 4;
        for (std::size_t s = 1; s < 4; ++s)
            for (std::size_t j = 0; j < 6; ++j)
                CHECK(table.features(first + s, j) == table.features(first, j));
    }
}

TEST_CASE("synthetic spec validation rejects degenerate descriptions") {
    SyntheticSpec spec;
    spec.classes = 0;
    CHECK_THROWS_AS(concil::validate_synthetic(spec), concil::ConfigError);
    spec = SyntheticSpec{};
    spec.samples_per_class = 0;
    CHECK_THROWS_AS(concil::validate_synthetic(spec), concil::ConfigError);
    spec = SyntheticSpec{};
    spec.noise_sigma = -0.5;
    CHECK_THROWS_AS(concil::validate_synthetic(spec), concil::ConfigError);
    spec = SyntheticSpec{};
    spec.concept_class_map = DenseMatrix(2, 2); // wrong shape and empty rows
    CHECK_THROWS_AS(concil::validate_synthetic(spec), concil::ConfigError);
    spec = SyntheticSpec{};
    spec.concept_class_map = DenseMatrix(spec.classes, spec.concepts);
    CHECK_THROWS_AS(concil::validate_synthetic(spec), concil::ConfigError); // no active concept
}

TEST_CASE("the default concept map separates classes in both regimes") {
    // window regime: more concepts than classes
    const DenseMatrix wide = concil::default_concept_class_map(10, 12);
    std::set<std::vector<double>> rows;
    for (std::size_t i = 0; i < 10; ++i) {
        std::vector<double> row(12);
        double active = 0.0;
        for (std::size_t j = 0; j < 12; ++j) {
            row[j] = wide(i, j);
            active += wide(i, j);
        }
        CHECK(active >= 1.0);
        rows.insert(row);
    }
    CHECK(rows.size() == 10);

    // binary-code regime: fewer concepts than classes
    const DenseMatrix narrow = concil::default_concept_class_map(5, 3);
    rows.clear();
    for (std::size_t i = 0; i < 5; ++i) {
        std::vector<double> row(3);
        double active = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            row[j] = narrow(i, j);
            active += narrow(i, j);
        }
        CHECK(active >= 1.0);
        rows.insert(row);
    }
    CHECK(rows.size() == 5);
    CHECK_THROWS_AS((void)concil::default_concept_class_map(8, 3), concil::ConfigError);
}

TEST_CASE("phase slices partition the table and balance the split per class") {
    SyntheticSpec spec;
    spec.classes = 6;
    spec.concepts = 8;
    spec.samples_per_class = 11; // odd count probes the rounding rule
    spec.feature_dim = 5;
    const LabeledDataset table = concil::generate_synthetic(spec);
    const CicilSchedule schedule = concil::build_schedule(6, 8, 0.4, 0.5, 3);

    std::multiset<double> seen_keys;
    std::size_t total_rows = 0;
    for (std::size_t t = 0; t < 3; ++t) {
        auto [train, test] = concil::slice_phase(table, schedule, t);
        const std::size_t phase_classes = schedule.per_phase_classes[t].size();
        CHECK(train.sample_count() + test.sample_count() == phase_classes * 11);
        // per-class split sizes differ by at most one at ratio 0.5
        CHECK(train.sample_count() == phase_classes * 6);
        CHECK(test.sample_count() == phase_classes * 5);
        // concept columns are exactly the visible set
        CHECK(train.concept_col_ids.size() == schedule.visible_concepts(t).size());
        CHECK(train.concept_col_ids == test.concept_col_ids);
        for (const PhaseBatch* batch : {&train, &test}) {
            batch->validate();
            total_rows += batch->sample_count();
            for (std::size_t i = 0; i < batch->sample_count(); ++i)
                seen_keys.insert(batch->features(i, 0));
        }
    }
    CHECK(total_rows == table.sample_count());
    std::multiset<double> table_keys;
    for (std::size_t r = 0; r < table.sample_count(); ++r)
        table_keys.insert(table.features(r, 0));
    CHECK(seen_keys == table_keys);
}

TEST_CASE("slicing is deterministic and respects the split seed") {
    SyntheticSpec spec;
    spec.classes = 4;
    spec.concepts = 6;
    spec.samples_per_class = 8;
    const LabeledDataset table = concil::generate_synthetic(spec);
    const CicilSchedule schedule = concil::build_schedule(4, 6, 0.5, 0.5, 2);

    auto [train_a, test_a] = concil::slice_phase(table, schedule, 1);
    auto [train_b, test_b] = concil::slice_phase(table, schedule, 1);
    CHECK(train_a.features == train_b.features);
    CHECK(test_a.concepts == test_b.concepts);

    concil::SplitSpec other;
    other.seed = 12345;
    auto [train_c, test_c] = concil::slice_phase(table, schedule, 1, other);
    CHECK(train_a.features != train_c.features);

    CHECK_THROWS_AS((void)concil::slice_phase(table, schedule, 2), concil::PhaseOutOfRange);
}

TEST_CASE("ordinals beyond the dataset are rejected at slice time") {
    SyntheticSpec spec;
    spec.classes = 3;
    spec.concepts = 4;
    spec.samples_per_class = 4;
    const LabeledDataset table = concil::generate_synthetic(spec);
    CicilSchedule schedule = concil::build_schedule(3, 4, 0.5, 0.5, 2);
    schedule.per_phase_classes[1] = {9};
    CHECK_THROWS_AS((void)concil::slice_phase(table, schedule, 1), concil::ConfigError);
    schedule = concil::build_schedule(3, 4, 0.5, 0.5, 2);
    schedule.per_phase_concepts[1] = {9};
    CHECK_THROWS_AS((void)concil::slice_phase(table, schedule, 1), concil::ConfigError);
}

TEST_CASE("the base fit separates concepts on the default synthetic table") {
    const SyntheticSpec spec; // defaults: 16 features, 10 classes, 12 concepts
    const LabeledDataset table = concil::generate_synthetic(spec);
    const CicilSchedule schedule = concil::build_schedule(spec.classes, spec.concepts, 0.5, 0.5, 2);
    auto [train, test] = concil::slice_phase(table, schedule, 0);

    concil::EngineConfig config;
    config.lambda1 = 0.1;
    config.lambda2 = 0.1;
    config.backbone_expansion_dim = 64;
    config.concept_expansion_dim = 64;
    const concil::ModelState state = concil::base_fit(train, config);

    const concil::Prediction on_train = concil::predict(state, train.features);
    CHECK(concil::concept_accuracy(on_train, train, state.concept_ids) >= 0.99);
    const concil::Prediction on_test = concil::predict(state, test.features);
    CHECK(concil::concept_accuracy(on_test, test, state.concept_ids) >= 0.99);
}
