// SPDX-License-Identifier: Apache-2.0
#include "concil/metrics.hpp"

#include <sstream>

#include "concil/errors.hpp"

namespace concil {

namespace {

void require_filled(const std::vector<std::vector<double>>& table, std::size_t t,
                    const char* which) {
    if (table.size() <= t) {
        std::ostringstream msg;
        msg << which << " history has " << table.size() << " rows, phase " << t << " requested";
        throw IncompleteHistory(msg.str());
    }
    for (std::size_t j = 0; j <= t; ++j)
        if (table[j].size() < j + 1) {
            std::ostringstream msg;
            msg << which << " history row " << j << " holds " << table[j].size()
                << " entries, needs " << (j + 1);
            throw IncompleteHistory(msg.str());
        }
}

double mean_of_row(const std::vector<std::vector<double>>& table, std::size_t t,
                   const char* which) {
    require_filled(table, t, which);
    double sum = 0.0;
    for (std::size_t k = 0; k <= t; ++k) sum += table[t][k];
    return sum / static_cast<double>(t + 1);
}

double forget_rate(const std::vector<std::vector<double>>& table, std::size_t t,
                   const char* which) {
    if (t == 0) {
        std::ostringstream msg;
        msg << which << " forgetting is undefined at phase 0";
        throw IncompleteHistory(msg.str());
    }
    require_filled(table, t, which);
    double sum = 0.0;
    for (std::size_t k = 0; k < t; ++k) {
        double best = table[k][k];
        for (std::size_t j = k + 1; j < t; ++j)
            if (table[j][k] > best) best = table[j][k];
        sum += best - table[t][k];
    }
    return sum / static_cast<double>(t);
}

} // namespace

double avg_concept_accuracy(const AccuracyHistory& history, std::size_t t) {
    return mean_of_row(history.concept_acc, t, "concept");
}

double avg_class_accuracy(const AccuracyHistory& history, std::size_t t) {
    return mean_of_row(history.class_acc, t, "class");
}

double concept_forget_rate(const AccuracyHistory& history, std::size_t t) {
    return forget_rate(history.concept_acc, t, "concept");
}

double class_forget_rate(const AccuracyHistory& history, std::size_t t) {
    return forget_rate(history.class_acc, t, "class");
}

} // namespace concil
