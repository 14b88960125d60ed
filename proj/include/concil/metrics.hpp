// SPDX-License-Identifier: Apache-2.0
#pragma once

// Continual-learning metrics over a lower-triangular accuracy history.
//
// Phases are 0-based: acc[t][k] is the accuracy of the phase-t model on task
// k's test split, defined for k <= t. The average at phase t is the plain
// mean of row t. The forgetting rate at phase t >= 1 is
//
//     (1/t) sum_{k=0}^{t-1} ( max_{k <= j < t} acc[j][k] - acc[t][k] )
//
// the mean drop from each finished task's best historical accuracy to its
// current accuracy. Summands can be negative when a task improved past its
// previous best, so the rate itself can be negative.

#include <cstddef>
#include <vector>

namespace concil {

struct AccuracyHistory {
    // Row t holds entries for tasks 0..t; both tables share the layout.
    std::vector<std::vector<double>> concept_acc;
    std::vector<std::vector<double>> class_acc;

    bool operator==(const AccuracyHistory&) const = default;
};

// All four throw IncompleteHistory when the triangle is not filled through
// phase t, and the forgetting rates also for t == 0 (no finished task yet).
double avg_concept_accuracy(const AccuracyHistory& history, std::size_t t);
double avg_class_accuracy(const AccuracyHistory& history, std::size_t t);
double concept_forget_rate(const AccuracyHistory& history, std::size_t t);
double class_forget_rate(const AccuracyHistory& history, std::size_t t);

} // namespace concil
