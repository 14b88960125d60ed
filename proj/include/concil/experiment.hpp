// SPDX-License-Identifier: Apache-2.0
#pragma once

// Experiment orchestration: resolves a JSON config into a dataset, a phase
// schedule, and one or more learners, drives the phase loop, evaluates every
// phase-t model on the test splits of all tasks <= t, and writes reports,
// per-phase checkpoints, and resumable progress files.
//
// Data discipline: the slice for phase t is constructed while processing
// phase t and nowhere else. Train slices are dropped as soon as the learners
// consumed them; test slices are retained in memory for later evaluation
// rather than re-read. Every slice construction is reported to the optional
// access observer, which tests use to audit the discipline. Resuming
// re-slices the test splits of already-finished phases once, at the resume
// phase, to rebuild the evaluation set.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "concil/engine.hpp"
#include "concil/harness.hpp"
#include "concil/metrics.hpp"

namespace concil {

struct ExperimentConfig {
    std::optional<std::string> bundle_path; // dataset source: exactly one of
    std::optional<SyntheticSpec> synthetic; // bundle_path / synthetic is set
    double n_frac = 0.5;
    double m_frac = 0.5;
    std::size_t phases = 2;
    SplitSpec split;
    EngineConfig engine;
    std::vector<std::string> learners = {"concil", "baseline"};
    std::string output_dir = "runs/out";
    std::vector<std::string> report_formats = {"csv"};
};

// Parses a config file (or raw JSON text), applying documented defaults for
// absent fields. Throws ConfigError on malformed or contradictory input.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text);

// Lists every problem with a config file without running anything: parse
// errors, missing-field default notices, infeasible schedules, unknown
// learners. An empty result means the config is ready to run.
std::vector<std::string> validate_config_file(const std::string& path);
std::vector<std::string> validate_config_text(const std::string& text);

// One slice construction, as seen by the access observer.
struct PhaseAccess {
    std::size_t slice = 0;        // which phase's data was materialized
    bool train = false;           // train or test half
    std::size_t during_phase = 0; // phase being processed at the time
};

struct RunOptions {
    std::optional<std::size_t> stop_after_phase; // checkpoint and stop early
    std::optional<std::string> resume_from;      // path to a progress file
    std::function<void(const PhaseAccess&)> access_observer;
};

struct LearnerRun {
    std::string name;
    AccuracyHistory history;
};

struct RunResult {
    std::vector<LearnerRun> learners;
    bool completed = false;      // reached the final phase and wrote reports
    std::size_t last_phase = 0;  // last phase folded into the learners
    std::string output_dir;
};

// Runs the configured experiment. Reports (metrics.csv, curves.csv) are
// written only when the final phase completes; checkpoints and a progress
// file are written after every phase. Throws on any module failure.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Accuracy of a prediction against a labeled test batch. Concept accuracy is
// the mean binary match over the batch's concept columns (matched to model
// columns by id); class accuracy is the fraction of rows whose decided class
// id equals the true one. Both are 1.0 on an empty batch.
double concept_accuracy(const Prediction& prediction, const PhaseBatch& test,
                        const std::vector<std::int64_t>& model_concept_ids);
double class_accuracy(const Prediction& prediction, const PhaseBatch& test,
                      const std::vector<std::int64_t>& model_class_ids);

} // namespace concil
