// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cstdint>
#include <vector>

#include "concil/errors.hpp"
#include "concil/metrics.hpp"
#include "concil/rng.hpp"
#include "doctest.h"

using concil::AccuracyHistory;

namespace {

using Table = std::vector<std::vector<double>>;

// Brute-force restatement of the definitions: collect every candidate,
// take the max with the standard algorithm, sum in task order.
double oracle_avg(const Table& table, std::size_t t) {
    double sum = 0.0;
    for (std::size_t k = 0; k <= t; ++k) sum += table[t][k];
    return sum / static_cast<double>(t + 1);
}

double oracle_forget(const Table& table, std::size_t t) {
    double sum = 0.0;
    for (std::size_t k = 0; k < t; ++k) {
        std::vector<double> candidates;
        for (std::size_t j = k; j < t; ++j) candidates.push_back(table[j][k]);
        const double best = *std::max_element(candidates.begin(), candidates.end());
        sum += best - table[t][k];
    }
    return sum / static_cast<double>(t);
}

AccuracyHistory history_from(const Table& table) {
    AccuracyHistory history;
    history.concept_acc = table;
    history.class_acc = table;
    return history;
}

} // namespace

TEST_CASE("single-task averages are the entry itself") {
    const AccuracyHistory history = history_from({{0.9}});
    CHECK(concil::avg_concept_accuracy(history, 0) == 0.9);
    CHECK(concil::avg_class_accuracy(history, 0) == 0.9);
}

TEST_CASE("the two-task average is the plain mean of the last row") {
    const AccuracyHistory history = history_from({{1.0}, {1.0, 0.5}});
    CHECK(concil::avg_class_accuracy(history, 1) == 0.75);
}

TEST_CASE("a drop from 0.8 to 0.6 forgets 0.2") {
    const AccuracyHistory history = history_from({{0.8}, {0.6, 0.9}});
    CHECK(concil::class_forget_rate(history, 1) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(concil::concept_forget_rate(history, 1) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("a history that never changes forgets nothing") {
    const AccuracyHistory history =
        history_from({{0.7}, {0.7, 0.8}, {0.7, 0.8, 0.9}, {0.7, 0.8, 0.9, 1.0}});
    for (std::size_t t = 1; t <= 3; ++t) {
        CHECK(concil::class_forget_rate(history, t) == 0.0);
        CHECK(concil::concept_forget_rate(history, t) == 0.0);
    }
}

TEST_CASE("improving past the previous best yields a negative rate") {
    const AccuracyHistory history = history_from({{0.5}, {0.9, 0.6}});
    CHECK(concil::class_forget_rate(history, 1) < 0.0);
    CHECK(concil::class_forget_rate(history, 1) == doctest::Approx(-0.4).epsilon(1e-15));
}

TEST_CASE("the best-so-far scan uses the full history, not just the diagonal") {
    // task 0: 0.5 at phase 0, improves to 0.9 at phase 1, drops to 0.3 at 2.
    const Table table = {{0.5}, {0.9, 1.0}, {0.3, 0.8, 1.0}};
    const AccuracyHistory history = history_from(table);
    // best for task 0 is 0.9 (phase 1), for task 1 it is 1.0 (its own phase)
    const double expected = ((0.9 - 0.3) + (1.0 - 0.8)) / 2.0;
    CHECK(concil::class_forget_rate(history, 2) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(concil::class_forget_rate(history, 2) == oracle_forget(table, 2));
}

TEST_CASE("metrics equal the brute-force oracle on random histories exactly") {
    concil::SplitMix64 gen(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t phases = 1 + gen.next_below(6);
        Table table(phases);
        for (std::size_t t = 0; t < phases; ++t) {
            table[t].resize(t + 1);
            for (std::size_t k = 0; k <= t; ++k)
                table[t][k] = static_cast<double>(gen.next_below(10001)) / 10000.0;
        }
        const AccuracyHistory history = history_from(table);
        for (std::size_t t = 0; t < phases; ++t) {
            CHECK(concil::avg_concept_accuracy(history, t) == oracle_avg(table, t));
            CHECK(concil::avg_class_accuracy(history, t) == oracle_avg(table, t));
            if (t >= 1) {
                CHECK(concil::concept_forget_rate(history, t) == oracle_forget(table, t));
                CHECK(concil::class_forget_rate(history, t) == oracle_forget(table, t));
            }
        }
    }
}

TEST_CASE("incomplete histories are rejected") {
    const AccuracyHistory history = history_from({{0.9}, {0.8, 0.7}});
    CHECK_THROWS_AS((void)concil::avg_concept_accuracy(history, 2), concil::IncompleteHistory);
    CHECK_THROWS_AS((void)concil::class_forget_rate(history, 0), concil::IncompleteHistory);
    CHECK_THROWS_AS((void)concil::concept_forget_rate(history, 0), concil::IncompleteHistory);

    AccuracyHistory ragged;
    ragged.concept_acc = {{0.9}, {0.8}}; // row 1 is short
    ragged.class_acc = {{0.9}, {0.8, 0.7}};
    CHECK_THROWS_AS((void)concil::avg_concept_accuracy(ragged, 1), concil::IncompleteHistory);
    CHECK_NOTHROW((void)concil::avg_class_accuracy(ragged, 1));
}
