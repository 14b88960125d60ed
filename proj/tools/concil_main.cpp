// SPDX-License-Identifier: Apache-2.0
//
// Command-line experiment driver.
//
//   concil run --config cfg.json [--output-dir DIR] [--seed N]
//              [--resume-from progress.json] [--stop-after-phase T]
//              [--access-log FILE]
//   concil validate --config cfg.json
//
// `run` executes the configured phase loop and writes reports; failures
// print a structured JSON error on stderr and exit nonzero. `validate`
// prints one diagnostic per line (nothing for a clean config) and exits 0;
// diagnostics are its output, not an error condition.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "concil/errors.hpp"
#include "concil/experiment.hpp"
#include "concil/metrics.hpp"

namespace {

const char* error_kind(const concil::Error& e) {
    if (dynamic_cast<const concil::DimensionMismatch*>(&e)) return "DimensionMismatch";
    if (dynamic_cast<const concil::SingularSystem*>(&e)) return "SingularSystem";
    if (dynamic_cast<const concil::NotPositiveDefinite*>(&e)) return "NotPositiveDefinite";
    if (dynamic_cast<const concil::ConfigError*>(&e)) return "ConfigError";
    if (dynamic_cast<const concil::PhaseOutOfRange*>(&e)) return "PhaseOutOfRange";
    if (dynamic_cast<const concil::DisjointClassViolation*>(&e)) return "DisjointClassViolation";
    if (dynamic_cast<const concil::EmptyBatch*>(&e)) return "EmptyBatch";
    if (dynamic_cast<const concil::IncompleteHistory*>(&e)) return "IncompleteHistory";
    if (dynamic_cast<const concil::VersionMismatch*>(&e)) return "VersionMismatch";
    if (dynamic_cast<const concil::DigestMismatch*>(&e)) return "DigestMismatch";
    if (dynamic_cast<const concil::SchemaError*>(&e)) return "SchemaError";
    if (dynamic_cast<const concil::IoError*>(&e)) return "IoError";
    return "Error";
}

int fail(const char* kind, const std::string& message) {
    nlohmann::json report{{"error", kind}, {"message", message}};
    std::cerr << report.dump() << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytic concept-bottleneck continual learner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::string resume_from;
    std::string access_log_path;
    std::uint64_t seed = 0;
    std::size_t stop_after_phase = 0;

    CLI::App* run = app.add_subcommand("run", "Run the configured experiment");
    run->add_option("--config", config_path, "Experiment config file (JSON)")->required();
    run->add_option("--output-dir", output_dir, "Override the configured output directory");
    CLI::Option* seed_opt =
        run->add_option("--seed", seed, "Override the dataset and split seeds");
    run->add_option("--resume-from", resume_from, "Progress file of an interrupted run");
    CLI::Option* stop_opt = run->add_option("--stop-after-phase", stop_after_phase,
                                            "Checkpoint and stop after this phase index");
    run->add_option("--access-log", access_log_path,
                    "Append one line per materialized phase slice to this file");

    CLI::App* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("--config", config_path, "Experiment config file (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            for (const std::string& line : concil::validate_config_file(config_path))
                std::cout << line << "\n";
            return 0;
        }

        concil::ExperimentConfig config = concil::load_experiment_config(config_path);
        if (!output_dir.empty()) config.output_dir = output_dir;
        if (seed_opt->count() > 0) {
            if (config.synthetic) config.synthetic->seed = seed;
            config.split.seed = seed;
        }

        concil::RunOptions options;
        if (!resume_from.empty()) options.resume_from = resume_from;
        if (stop_opt->count() > 0) options.stop_after_phase = stop_after_phase;
        std::ofstream access_log;
        if (!access_log_path.empty()) {
            access_log.open(access_log_path, std::ios::trunc);
            if (!access_log) return fail("IoError", "cannot open " + access_log_path);
            access_log << "slice,split,during_phase\n";
            options.access_observer = [&access_log](const concil::PhaseAccess& access) {
                access_log << access.slice << ',' << (access.train ? "train" : "test") << ','
                           << access.during_phase << '\n';
            };
        }

        concil::RunResult result = concil::run_experiment(config, options);
        if (!result.completed) {
            std::cout << "stopped after phase " << result.last_phase << "; resume with "
                      << "--resume-from " << result.output_dir << "/progress_phase_"
                      << result.last_phase << ".json\n";
            return 0;
        }
        std::cout << "completed " << result.last_phase + 1 << " phase(s) into "
                  << result.output_dir << "\n";
        for (const concil::LearnerRun& learner : result.learners) {
            std::size_t t = result.last_phase;
            std::cout << learner.name
                      << ": avg_concept_accuracy=" << avg_concept_accuracy(learner.history, t)
                      << " avg_class_accuracy=" << avg_class_accuracy(learner.history, t);
            if (t >= 1)
                std::cout << " concept_forget_rate=" << concept_forget_rate(learner.history, t)
                          << " class_forget_rate=" << class_forget_rate(learner.history, t);
            std::cout << "\n";
        }
        return 0;
    } catch (const concil::Error& e) {
        return fail(error_kind(e), e.what());
    } catch (const std::exception& e) {
        return fail("InternalError", e.what());
    }
}
