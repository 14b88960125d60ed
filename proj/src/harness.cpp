// SPDX-License-Identifier: Apache-2.0
#include "concil/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "concil/errors.hpp"
#include "concil/rng.hpp"

namespace concil {

namespace {

// ceil(frac * count) with a guard against binary-fraction dust such as
// 0.1 * 30 = 3.0000000000000004.
std::size_t ceil_fraction(double frac, std::size_t count) {
    double raw = frac * static_cast<double>(count);
    return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

// Splits `remaining` items over `phases` buckets as evenly as possible,
// earlier buckets absorbing the remainder. Returns per-bucket counts.
std::vector<std::size_t> even_split(std::size_t remaining, std::size_t phases) {
    std::vector<std::size_t> counts(phases, phases ? remaining / phases : 0);
    if (phases)
        for (std::size_t i = 0; i < remaining % phases; ++i) ++counts[i];
    return counts;
}

std::vector<std::size_t> shuffled_indices(const std::vector<std::size_t>& indices,
                                          std::uint64_t seed) {
    std::vector<std::size_t> out = indices;
    SplitMix64 rng(seed);
    for (std::size_t i = out.size(); i > 1; --i)
        std::swap(out[i - 1], out[rng.next_below(i)]);
    return out;
}

} // namespace

void LabeledDataset::validate() const {
    if (concepts.rows() != features.rows())
        throw DimensionMismatch("concept row count does not match feature row count");
    if (class_labels.size() != features.rows())
        throw DimensionMismatch("label count does not match feature row count");
    if (concept_column_ids.size() != concepts.cols())
        throw DimensionMismatch("concept_column_ids does not match concept column count");
    std::set<std::int64_t> seen(concept_column_ids.begin(), concept_column_ids.end());
    if (seen.size() != concept_column_ids.size())
        throw ConfigError("concept_column_ids contains duplicates");
    for (std::size_t r = 0; r < concepts.rows(); ++r)
        for (std::size_t c = 0; c < concepts.cols(); ++c) {
            double v = concepts(r, c);
            if (v != 0.0 && v != 1.0) {
                std::ostringstream msg;
                msg << "concept annotation at [" << r << "][" << c << "] must be 0 or 1, found "
                    << v;
                throw ConfigError(msg.str());
            }
        }
}

std::vector<std::size_t> CicilSchedule::visible_concepts(std::size_t t) const {
    if (t >= p) throw PhaseOutOfRange("phase index exceeds schedule length");
    std::vector<std::size_t> visible;
    for (std::size_t k = 0; k <= t; ++k)
        visible.insert(visible.end(), per_phase_concepts[k].begin(), per_phase_concepts[k].end());
    return visible;
}

CicilSchedule build_schedule(std::size_t class_count, std::size_t concept_count, double n_frac,
                             double m_frac, std::size_t p) {
    if (p < 1) throw ConfigError("phase count must be at least 1");
    if (class_count < 1) throw ConfigError("schedule needs at least one class");
    if (concept_count < 1) throw ConfigError("schedule needs at least one concept");
    auto check_fraction = [p](double f, const char* name) {
        if (!(f > 0.0) || f > 1.0) {
            std::ostringstream msg;
            msg << name << " must lie in (0,1], got " << f;
            throw ConfigError(msg.str());
        }
        if (p >= 2 && f >= 1.0) {
            std::ostringstream msg;
            msg << name << " must be below 1 when incremental phases exist";
            throw ConfigError(msg.str());
        }
    };
    check_fraction(n_frac, "n_frac");
    check_fraction(m_frac, "m_frac");

    CicilSchedule schedule;
    schedule.n_frac = n_frac;
    schedule.m_frac = m_frac;
    schedule.p = p;
    schedule.per_phase_classes.resize(p);
    schedule.per_phase_concepts.resize(p);

    std::size_t base_classes = p == 1 ? class_count : ceil_fraction(n_frac, class_count);
    std::size_t base_concepts = p == 1 ? concept_count : ceil_fraction(m_frac, concept_count);
    base_classes = std::min(base_classes, class_count);
    base_concepts = std::min(base_concepts, concept_count);

    std::size_t remaining_classes = class_count - base_classes;
    if (p >= 2 && remaining_classes < p - 1) {
        std::ostringstream msg;
        msg << "cannot fill " << (p - 1) << " incremental phases with " << remaining_classes
            << " remaining classes";
        throw ConfigError(msg.str());
    }

    std::size_t next_class = 0;
    std::size_t next_concept = 0;
    auto take = [](std::size_t& cursor, std::size_t count) {
        std::vector<std::size_t> ids(count);
        for (std::size_t i = 0; i < count; ++i) ids[i] = cursor++;
        return ids;
    };
    schedule.per_phase_classes[0] = take(next_class, base_classes);
    schedule.per_phase_concepts[0] = take(next_concept, base_concepts);
    if (p >= 2) {
        std::vector<std::size_t> class_counts = even_split(remaining_classes, p - 1);
        std::vector<std::size_t> concept_counts = even_split(concept_count - base_concepts, p - 1);
        for (std::size_t t = 1; t < p; ++t) {
            schedule.per_phase_classes[t] = take(next_class, class_counts[t - 1]);
            schedule.per_phase_concepts[t] = take(next_concept, concept_counts[t - 1]);
        }
    }
    return schedule;
}

std::pair<PhaseBatch, PhaseBatch> slice_phase(const LabeledDataset& dataset,
                                              const CicilSchedule& schedule, std::size_t t,
                                              const SplitSpec& split) {
    if (t >= schedule.p) {
        std::ostringstream msg;
        msg << "phase " << t << " requested from a " << schedule.p << "-phase schedule";
        throw PhaseOutOfRange(msg.str());
    }
    dataset.validate();
    if (!(split.train_ratio >= 0.0) || split.train_ratio > 1.0)
        throw ConfigError("train_ratio must lie in [0,1]");

    std::set<std::int64_t> distinct(dataset.class_labels.begin(), dataset.class_labels.end());
    std::vector<std::int64_t> sorted_classes(distinct.begin(), distinct.end());

    const std::vector<std::size_t>& class_ordinals = schedule.per_phase_classes[t];
    std::vector<std::size_t> concept_ordinals = schedule.visible_concepts(t);
    for (std::size_t ord : class_ordinals)
        if (ord >= sorted_classes.size())
            throw ConfigError("schedule refers to a class ordinal beyond the dataset");
    for (std::size_t ord : concept_ordinals)
        if (ord >= dataset.concept_column_ids.size())
            throw ConfigError("schedule refers to a concept ordinal beyond the dataset");

    std::vector<std::int64_t> phase_class_ids;
    phase_class_ids.reserve(class_ordinals.size());
    for (std::size_t ord : class_ordinals) phase_class_ids.push_back(sorted_classes[ord]);
    std::vector<std::int64_t> visible_concept_ids;
    visible_concept_ids.reserve(concept_ordinals.size());
    for (std::size_t ord : concept_ordinals)
        visible_concept_ids.push_back(dataset.concept_column_ids[ord]);

    // Per class: seeded shuffle, first round(ratio * count) rows train.
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t pos = 0; pos < class_ordinals.size(); ++pos) {
        std::int64_t class_id = phase_class_ids[pos];
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < dataset.class_labels.size(); ++r)
            if (dataset.class_labels[r] == class_id) rows.push_back(r);
        std::vector<std::size_t> order =
            shuffled_indices(rows, derive_seed(split.seed, class_ordinals[pos]));
        auto train_count = static_cast<std::size_t>(
            std::llround(split.train_ratio * static_cast<double>(order.size())));
        train_count = std::min(train_count, order.size());
        train_rows.insert(train_rows.end(), order.begin(), order.begin() + train_count);
        test_rows.insert(test_rows.end(), order.begin() + train_count, order.end());
    }

    auto assemble = [&](const std::vector<std::size_t>& rows) {
        PhaseBatch batch;
        batch.concept_col_ids = visible_concept_ids;
        batch.class_col_ids = phase_class_ids;
        batch.features = DenseMatrix(rows.size(), dataset.features.cols());
        batch.concepts = DenseMatrix(rows.size(), concept_ordinals.size());
        batch.classes = DenseMatrix(rows.size(), phase_class_ids.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::size_t r = rows[i];
            for (std::size_t c = 0; c < dataset.features.cols(); ++c)
                batch.features(i, c) = dataset.features(r, c);
            for (std::size_t j = 0; j < concept_ordinals.size(); ++j)
                batch.concepts(i, j) = dataset.concepts(r, concept_ordinals[j]);
            for (std::size_t j = 0; j < phase_class_ids.size(); ++j)
                if (dataset.class_labels[r] == phase_class_ids[j]) batch.classes(i, j) = 1.0;
        }
        return batch;
    };
    return {assemble(train_rows), assemble(test_rows)};
}

DenseMatrix default_concept_class_map(std::size_t classes, std::size_t concepts) {
    if (classes == 0 || concepts == 0)
        throw ConfigError("concept map needs at least one class and one concept");
    DenseMatrix map(classes, concepts);
    if (concepts >= classes) {
        // Sliding windows with strictly increasing starts: distinct rows,
        // every class active on a contiguous concept run.
        std::size_t width =
            std::max<std::size_t>(1, std::min(concepts - classes + 1, (concepts + 1) / 2));
        for (std::size_t i = 0; i < classes; ++i) {
            std::size_t start =
                classes == 1 ? 0 : i * (concepts - width) / (classes - 1);
            for (std::size_t j = start; j < start + width && j < concepts; ++j) map(i, j) = 1.0;
        }
        return map;
    }
    // Binary codes 1..classes over the concept bits: distinct and nonzero.
    if (concepts >= 64 || classes > (std::size_t{1} << concepts) - 1)
        throw ConfigError("too many classes for distinct binary concept codes");
    for (std::size_t i = 0; i < classes; ++i) {
        std::size_t code = i + 1;
        for (std::size_t j = 0; j < concepts; ++j)
            if (code & (std::size_t{1} << j)) map(i, j) = 1.0;
    }
    return map;
}

void validate_synthetic(const SyntheticSpec& spec) {
    if (spec.feature_dim == 0) throw ConfigError("feature_dim must be at least 1");
    if (spec.classes == 0) throw ConfigError("classes must be at least 1");
    if (spec.concepts == 0) throw ConfigError("concepts must be at least 1");
    if (spec.samples_per_class == 0) throw ConfigError("samples_per_class must be at least 1");
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
        throw ConfigError("noise_sigma must be nonnegative and finite");
    if (spec.concept_class_map.empty()) return;
    const DenseMatrix& map = spec.concept_class_map;
    if (map.rows() != spec.classes || map.cols() != spec.concepts)
        throw ConfigError("concept_class_map dimensions do not match classes x concepts");
    for (std::size_t i = 0; i < map.rows(); ++i) {
        double active = 0.0;
        for (std::size_t j = 0; j < map.cols(); ++j) {
            double v = map(i, j);
            if (v != 0.0 && v != 1.0) throw ConfigError("concept_class_map must be binary");
            active += v;
        }
        if (active == 0.0) {
            std::ostringstream msg;
            msg << "class " << i << " activates no concept";
            throw ConfigError(msg.str());
        }
    }
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
    validate_synthetic(spec);
    DenseMatrix map = spec.concept_class_map.empty()
                          ? default_concept_class_map(spec.classes, spec.concepts)
                          : spec.concept_class_map;

    std::size_t total = spec.classes * spec.samples_per_class;
    LabeledDataset table;
    table.concepts = DenseMatrix(total, spec.concepts);
    table.class_labels.resize(total);
    table.concept_column_ids.resize(spec.concepts);
    for (std::size_t j = 0; j < spec.concepts; ++j)
        table.concept_column_ids[j] = static_cast<std::int64_t>(j);
    for (std::size_t i = 0; i < spec.classes; ++i)
        for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
            std::size_t r = i * spec.samples_per_class + s;
            table.class_labels[r] = static_cast<std::int64_t>(i);
            for (std::size_t j = 0; j < spec.concepts; ++j) table.concepts(r, j) = map(i, j);
        }

    // Features are a fixed seeded linear image of the concept vector plus
    // isotropic noise; noise values are drawn even at sigma 0 so the stream
    // layout does not depend on sigma.
    DenseMatrix mixing(spec.concepts, spec.feature_dim);
    NormalStream mix_stream(derive_seed(spec.seed, 0));
    double mix_scale = 1.0 / std::sqrt(static_cast<double>(spec.concepts));
    for (std::size_t l = 0; l < mixing.rows(); ++l)
        for (std::size_t j = 0; j < mixing.cols(); ++j) mixing(l, j) = mix_scale * mix_stream.next();
    table.features = table.concepts * mixing;
    NormalStream noise_stream(derive_seed(spec.seed, 1));
    for (std::size_t r = 0; r < total; ++r)
        for (std::size_t j = 0; j < spec.feature_dim; ++j)
            table.features(r, j) += spec.noise_sigma * noise_stream.next();
    return table;
}

} // namespace concil
