// SPDX-License-Identifier: Apache-2.0
#include "concil/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "concil/baseline.hpp"
#include "concil/errors.hpp"
#include "concil/persistence.hpp"

namespace concil {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kKnownLearners = {"concil", "baseline"};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading " + path);
    return buf.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + path);
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw IoError("cannot format a floating-point value");
    return std::string(buf, end);
}

// ---- config parsing ----

[[noreturn]] void bad_field(const std::string& name, const char* expected) {
    throw ConfigError("field '" + name + "' must be " + expected);
}

double get_number(const json& node, const std::string& name) {
    if (!node.is_number()) bad_field(name, "a number");
    return node.get<double>();
}

std::size_t get_count(const json& node, const std::string& name) {
    if (!node.is_number_unsigned()) bad_field(name, "a nonnegative integer");
    return node.get<std::size_t>();
}

std::uint64_t get_seed(const json& node, const std::string& name) {
    if (!node.is_number_unsigned()) bad_field(name, "a nonnegative integer");
    return node.get<std::uint64_t>();
}

std::string get_string(const json& node, const std::string& name) {
    if (!node.is_string()) bad_field(name, "a string");
    return node.get<std::string>();
}

void note_unknown_keys(const json& node, std::initializer_list<const char*> allowed,
                       const std::string& prefix, std::vector<std::string>& notices) {
    if (!node.is_object()) return;
    for (auto it = node.begin(); it != node.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) notices.push_back("unknown field '" + prefix + it.key() + "' is ignored");
    }
}

DenseMatrix matrix_from_json(const json& node, const std::string& name) {
    if (!node.is_array()) bad_field(name, "an array of arrays");
    std::size_t rows = node.size();
    std::size_t cols = rows == 0 ? 0 : node[0].size();
    DenseMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = node[r];
        if (!row.is_array() || row.size() != cols)
            throw ConfigError("field '" + name + "' rows must all have equal length");
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = get_number(row[c], name + " entry");
    }
    return m;
}

json matrix_to_json(const DenseMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

ExperimentConfig parse_json_config(const json& root, std::vector<std::string>& notices) {
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    note_unknown_keys(root,
                      {"dataset", "schedule", "engine", "learners", "output_dir",
                       "report_formats"},
                      "", notices);
    ExperimentConfig config;

    auto dataset_it = root.find("dataset");
    if (dataset_it == root.end()) throw ConfigError("field 'dataset' missing");
    const json& dataset = *dataset_it;
    note_unknown_keys(dataset, {"synthetic", "bundle"}, "dataset.", notices);
    bool has_synthetic = dataset.contains("synthetic");
    bool has_bundle = dataset.contains("bundle");
    if (has_synthetic == has_bundle)
        throw ConfigError("dataset must name exactly one of 'synthetic' or 'bundle'");
    if (has_bundle) {
        config.bundle_path = get_string(dataset["bundle"], "dataset.bundle");
    } else {
        const json& syn = dataset["synthetic"];
        if (!syn.is_object()) bad_field("dataset.synthetic", "an object");
        note_unknown_keys(syn,
                          {"feature_dim", "classes", "concepts", "samples_per_class", "seed",
                           "noise_sigma", "concept_class_map"},
                          "dataset.synthetic.", notices);
        SyntheticSpec spec;
        if (syn.contains("feature_dim"))
            spec.feature_dim = get_count(syn["feature_dim"], "dataset.synthetic.feature_dim");
        if (syn.contains("classes"))
            spec.classes = get_count(syn["classes"], "dataset.synthetic.classes");
        if (syn.contains("concepts"))
            spec.concepts = get_count(syn["concepts"], "dataset.synthetic.concepts");
        if (syn.contains("samples_per_class"))
            spec.samples_per_class =
                get_count(syn["samples_per_class"], "dataset.synthetic.samples_per_class");
        if (syn.contains("seed")) spec.seed = get_seed(syn["seed"], "dataset.synthetic.seed");
        if (syn.contains("noise_sigma"))
            spec.noise_sigma = get_number(syn["noise_sigma"], "dataset.synthetic.noise_sigma");
        if (syn.contains("concept_class_map"))
            spec.concept_class_map =
                matrix_from_json(syn["concept_class_map"], "dataset.synthetic.concept_class_map");
        config.synthetic = std::move(spec);
    }

    if (auto it = root.find("schedule"); it != root.end()) {
        const json& sched = *it;
        if (!sched.is_object()) bad_field("schedule", "an object");
        note_unknown_keys(sched, {"n_frac", "m_frac", "phases", "train_ratio", "split_seed"},
                          "schedule.", notices);
        if (sched.contains("n_frac")) config.n_frac = get_number(sched["n_frac"], "schedule.n_frac");
        if (sched.contains("m_frac")) config.m_frac = get_number(sched["m_frac"], "schedule.m_frac");
        if (sched.contains("phases")) config.phases = get_count(sched["phases"], "schedule.phases");
        if (sched.contains("train_ratio"))
            config.split.train_ratio = get_number(sched["train_ratio"], "schedule.train_ratio");
        if (sched.contains("split_seed"))
            config.split.seed = get_seed(sched["split_seed"], "schedule.split_seed");
    }

    if (auto it = root.find("engine"); it != root.end()) {
        const json& eng = *it;
        if (!eng.is_object()) bad_field("engine", "an object");
        note_unknown_keys(eng,
                          {"lambda1", "lambda2", "backbone_expansion_dim", "concept_expansion_dim",
                           "backbone_seed", "concept_seed", "expansion_scale",
                           "growth_out_per_phase"},
                          "engine.", notices);
        if (eng.contains("lambda1"))
            config.engine.lambda1 = get_number(eng["lambda1"], "engine.lambda1");
        else
            notices.push_back("engine.lambda1 missing, default 500 applied");
        if (eng.contains("lambda2"))
            config.engine.lambda2 = get_number(eng["lambda2"], "engine.lambda2");
        else
            notices.push_back("engine.lambda2 missing, default 1 applied");
        if (eng.contains("backbone_expansion_dim"))
            config.engine.backbone_expansion_dim =
                get_count(eng["backbone_expansion_dim"], "engine.backbone_expansion_dim");
        if (eng.contains("concept_expansion_dim"))
            config.engine.concept_expansion_dim =
                get_count(eng["concept_expansion_dim"], "engine.concept_expansion_dim");
        if (eng.contains("backbone_seed"))
            config.engine.backbone_seed = get_seed(eng["backbone_seed"], "engine.backbone_seed");
        if (eng.contains("concept_seed"))
            config.engine.concept_seed = get_seed(eng["concept_seed"], "engine.concept_seed");
        if (eng.contains("expansion_scale"))
            config.engine.expansion_scale =
                get_number(eng["expansion_scale"], "engine.expansion_scale");
        if (eng.contains("growth_out_per_phase"))
            config.engine.growth_out_per_phase =
                get_count(eng["growth_out_per_phase"], "engine.growth_out_per_phase");
    } else {
        notices.push_back("engine.lambda1 missing, default 500 applied");
        notices.push_back("engine.lambda2 missing, default 1 applied");
    }

    if (auto it = root.find("learners"); it != root.end()) {
        if (!it->is_array()) bad_field("learners", "an array of learner names");
        config.learners.clear();
        for (const json& entry : *it)
            config.learners.push_back(get_string(entry, "learners entry"));
    }
    if (auto it = root.find("output_dir"); it != root.end())
        config.output_dir = get_string(*it, "output_dir");
    if (auto it = root.find("report_formats"); it != root.end()) {
        if (!it->is_array()) bad_field("report_formats", "an array of format names");
        config.report_formats.clear();
        for (const json& entry : *it)
            config.report_formats.push_back(get_string(entry, "report_formats entry"));
    }
    return config;
}

json config_echo_json(const ExperimentConfig& config) {
    json echo;
    if (config.bundle_path) {
        echo["dataset"]["bundle"] = *config.bundle_path;
    } else if (config.synthetic) {
        const SyntheticSpec& spec = *config.synthetic;
        json syn;
        syn["feature_dim"] = spec.feature_dim;
        syn["classes"] = spec.classes;
        syn["concepts"] = spec.concepts;
        syn["samples_per_class"] = spec.samples_per_class;
        syn["seed"] = spec.seed;
        syn["noise_sigma"] = spec.noise_sigma;
        if (!spec.concept_class_map.empty())
            syn["concept_class_map"] = matrix_to_json(spec.concept_class_map);
        echo["dataset"]["synthetic"] = std::move(syn);
    }
    echo["schedule"] = {{"n_frac", config.n_frac},
                        {"m_frac", config.m_frac},
                        {"phases", config.phases},
                        {"train_ratio", config.split.train_ratio},
                        {"split_seed", config.split.seed}};
    json eng;
    eng["lambda1"] = config.engine.lambda1;
    eng["lambda2"] = config.engine.lambda2;
    eng["backbone_expansion_dim"] = config.engine.backbone_expansion_dim;
    eng["concept_expansion_dim"] = config.engine.concept_expansion_dim;
    eng["backbone_seed"] = config.engine.backbone_seed;
    eng["concept_seed"] = config.engine.concept_seed;
    if (config.engine.expansion_scale) eng["expansion_scale"] = *config.engine.expansion_scale;
    if (config.engine.growth_out_per_phase)
        eng["growth_out_per_phase"] = *config.engine.growth_out_per_phase;
    echo["engine"] = std::move(eng);
    echo["learners"] = config.learners;
    echo["output_dir"] = config.output_dir;
    echo["report_formats"] = config.report_formats;
    return echo;
}

json history_to_json(const AccuracyHistory& history) {
    return json{{"concept_acc", history.concept_acc}, {"class_acc", history.class_acc}};
}

AccuracyHistory history_from_json(const json& node) {
    AccuracyHistory history;
    try {
        history.concept_acc = node.at("concept_acc").get<std::vector<std::vector<double>>>();
        history.class_acc = node.at("class_acc").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw SchemaError("progress history is malformed: " + std::string(e.what()));
    }
    auto check_triangle = [](const std::vector<std::vector<double>>& table) {
        for (std::size_t t = 0; t < table.size(); ++t)
            if (table[t].size() != t + 1)
                throw SchemaError("progress history rows are not lower-triangular");
    };
    check_triangle(history.concept_acc);
    check_triangle(history.class_acc);
    if (history.concept_acc.size() != history.class_acc.size())
        throw SchemaError("progress history tables disagree on phase count");
    return history;
}

// Baseline states travel through the checkpoint format with empty inverse
// correlation matrices.
ModelState baseline_to_model(const BaselineState& state) {
    ModelState model;
    model.backbone_expansion = state.backbone_expansion;
    model.concept_expansion = state.concept_expansion;
    model.concept_weights = state.concept_weights;
    model.class_weights = state.class_weights;
    model.lambda1 = state.lambda1;
    model.lambda2 = state.lambda2;
    model.growth_out_per_phase = state.growth_out_per_phase;
    model.concept_ids = state.concept_ids;
    model.class_ids = state.class_ids;
    model.phase = state.phase;
    return model;
}

BaselineState model_to_baseline(const ModelState& model) {
    BaselineState state;
    state.backbone_expansion = model.backbone_expansion;
    state.concept_expansion = model.concept_expansion;
    state.concept_weights = model.concept_weights;
    state.class_weights = model.class_weights;
    state.lambda1 = model.lambda1;
    state.lambda2 = model.lambda2;
    state.growth_out_per_phase = model.growth_out_per_phase;
    state.concept_ids = model.concept_ids;
    state.class_ids = model.class_ids;
    state.phase = model.phase;
    return state;
}

struct LearnerSlot {
    std::string name;
    std::optional<ModelState> model;
    std::optional<BaselineState> baseline;
    AccuracyHistory history;
};

void check_runnable(const ExperimentConfig& config) {
    config.engine.validate();
    if (config.bundle_path.has_value() == config.synthetic.has_value())
        throw ConfigError("dataset must name exactly one of 'synthetic' or 'bundle'");
    if (config.learners.empty()) throw ConfigError("at least one learner must be configured");
    std::set<std::string> seen;
    for (const std::string& name : config.learners) {
        if (std::find(kKnownLearners.begin(), kKnownLearners.end(), name) == kKnownLearners.end())
            throw ConfigError("unknown learner '" + name + "'");
        if (!seen.insert(name).second) throw ConfigError("learner '" + name + "' listed twice");
    }
    for (const std::string& fmt : config.report_formats)
        if (fmt != "csv") throw ConfigError("unknown report format '" + fmt + "'");
    if (config.output_dir.empty()) throw ConfigError("output_dir must not be empty");
    if (!(config.split.train_ratio >= 0.0) || config.split.train_ratio > 1.0)
        throw ConfigError("train_ratio must lie in [0,1]");
    if (config.synthetic) validate_synthetic(*config.synthetic);
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    std::vector<std::string> notices;
    return parse_json_config(root, notices);
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(slurp(path));
}

std::vector<std::string> validate_config_text(const std::string& text) {
    std::vector<std::string> diagnostics;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        diagnostics.push_back("config is not valid JSON: " + std::string(e.what()));
        return diagnostics;
    }
    ExperimentConfig config;
    try {
        config = parse_json_config(root, diagnostics);
    } catch (const Error& e) {
        diagnostics.push_back(e.what());
        return diagnostics;
    }
    try {
        check_runnable(config);
    } catch (const Error& e) {
        diagnostics.push_back(e.what());
    }

    // Schedule feasibility needs the dataset's class and concept counts; for
    // bundles the manifest alone provides them.
    std::size_t class_count = 0;
    std::size_t concept_count = 0;
    bool counts_known = false;
    if (config.synthetic) {
        class_count = config.synthetic->classes;
        concept_count = config.synthetic->concepts;
        counts_known = true;
    } else if (config.bundle_path) {
        try {
            json manifest =
                json::parse(slurp((fs::path(*config.bundle_path) / "manifest.json").string()));
            class_count = manifest.at("class_count").get<std::size_t>();
            concept_count = manifest.at("concept_dim").get<std::size_t>();
            counts_known = true;
        } catch (const std::exception& e) {
            diagnostics.push_back("bundle manifest unreadable: " + std::string(e.what()));
        }
    }
    if (counts_known) {
        try {
            build_schedule(class_count, concept_count, config.n_frac, config.m_frac,
                           config.phases);
        } catch (const Error& e) {
            diagnostics.push_back(std::string("schedule infeasible: ") + e.what());
        }
    }
    return diagnostics;
}

std::vector<std::string> validate_config_file(const std::string& path) {
    try {
        return validate_config_text(slurp(path));
    } catch (const Error& e) {
        return {e.what()};
    }
}

double concept_accuracy(const Prediction& prediction, const PhaseBatch& test,
                        const std::vector<std::int64_t>& model_concept_ids) {
    std::size_t rows = test.concepts.rows();
    std::size_t cols = test.concept_col_ids.size();
    if (rows == 0 || cols == 0) return 1.0;
    std::vector<std::size_t> model_col(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        auto it = std::find(model_concept_ids.begin(), model_concept_ids.end(),
                            test.concept_col_ids[j]);
        if (it == model_concept_ids.end()) {
            std::ostringstream msg;
            msg << "model has never seen concept id " << test.concept_col_ids[j];
            throw ConfigError(msg.str());
        }
        model_col[j] = static_cast<std::size_t>(it - model_concept_ids.begin());
    }
    std::size_t matches = 0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < cols; ++j)
            if (prediction.concept_decisions(r, model_col[j]) == test.concepts(r, j)) ++matches;
    return static_cast<double>(matches) / static_cast<double>(rows * cols);
}

double class_accuracy(const Prediction& prediction, const PhaseBatch& test,
                      const std::vector<std::int64_t>& model_class_ids) {
    std::size_t rows = test.classes.rows();
    if (rows == 0) return 1.0;
    std::size_t matches = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        std::int64_t truth = 0;
        bool found = false;
        for (std::size_t j = 0; j < test.class_col_ids.size(); ++j)
            if (test.classes(r, j) == 1.0) {
                truth = test.class_col_ids[j];
                found = true;
                break;
            }
        if (!found) throw ConfigError("test batch row is not one-hot");
        std::size_t decided = prediction.class_decisions[r];
        if (decided < model_class_ids.size() && model_class_ids[decided] == truth) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(rows);
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    check_runnable(config);

    LabeledDataset dataset =
        config.bundle_path ? read_bundle(*config.bundle_path) : generate_synthetic(*config.synthetic);
    dataset.validate();
    std::set<std::int64_t> distinct(dataset.class_labels.begin(), dataset.class_labels.end());
    CicilSchedule schedule = build_schedule(distinct.size(), dataset.concepts.cols(),
                                            config.n_frac, config.m_frac, config.phases);

    fs::path out_dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(out_dir / "checkpoints", ec);
    if (ec)
        throw IoError("cannot create output directory " + config.output_dir + ": " + ec.message());
    json echo = config_echo_json(config);
    spill((out_dir / "config_echo.json").string(), echo.dump(2) + "\n");

    std::vector<LearnerSlot> slots;
    for (const std::string& name : config.learners) slots.push_back({name, {}, {}, {}});
    std::vector<std::optional<PhaseBatch>> test_batches(schedule.p);

    auto observe = [&](std::size_t slice, bool train, std::size_t during) {
        if (options.access_observer) options.access_observer({slice, train, during});
    };

    std::size_t start_phase = 0;
    if (options.resume_from) {
        json progress;
        try {
            progress = json::parse(slurp(*options.resume_from));
        } catch (const json::exception& e) {
            throw SchemaError("progress file is not valid JSON: " + std::string(e.what()));
        }
        if (!progress.contains("config_echo") || progress["config_echo"] != echo)
            throw ConfigError("progress file was written under a different configuration");
        std::size_t done_phase = 0;
        try {
            done_phase = progress.at("phase").get<std::size_t>();
        } catch (const json::exception&) {
            throw SchemaError("progress field 'phase' missing or malformed");
        }
        if (done_phase >= schedule.p)
            throw ConfigError("progress phase exceeds the configured phase count");
        const json& learners = progress.at("learners");
        if (!learners.is_array() || learners.size() != slots.size())
            throw ConfigError("progress learners do not match the configured learners");
        fs::path base = fs::path(*options.resume_from).parent_path();
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const json& entry = learners[i];
            if (entry.at("name").get<std::string>() != slots[i].name)
                throw ConfigError("progress learners do not match the configured learners");
            ModelState loaded =
                load_checkpoint((base / entry.at("checkpoint").get<std::string>()).string());
            if (slots[i].name == "baseline")
                slots[i].baseline = model_to_baseline(loaded);
            else
                slots[i].model = std::move(loaded);
            slots[i].history = history_from_json(entry.at("history"));
            if (slots[i].history.concept_acc.size() != done_phase + 1)
                throw SchemaError("progress history does not cover the finished phases");
        }
        start_phase = done_phase + 1;
        // Rebuild the evaluation set for the finished phases.
        for (std::size_t k = 0; k <= done_phase; ++k) {
            auto [train, test] = slice_phase(dataset, schedule, k, config.split);
            (void)train;
            observe(k, false, start_phase < schedule.p ? start_phase : done_phase);
            test_batches[k] = std::move(test);
        }
    }

    for (std::size_t t = start_phase; t < schedule.p; ++t) {
        {
            auto [train, test] = slice_phase(dataset, schedule, t, config.split);
            observe(t, true, t);
            observe(t, false, t);
            test_batches[t] = std::move(test);
            for (LearnerSlot& slot : slots) {
                if (slot.name == "baseline") {
                    slot.baseline = t == 0 ? baseline_base_fit(train, config.engine)
                                           : baseline_phase_fit(*slot.baseline, train);
                } else {
                    slot.model = t == 0 ? base_fit(train, config.engine)
                                        : phase_update(*slot.model, train);
                }
            }
        } // the train slice is dropped here, before any evaluation

        for (LearnerSlot& slot : slots) {
            std::vector<double> concept_row;
            std::vector<double> class_row;
            for (std::size_t k = 0; k <= t; ++k) {
                const PhaseBatch& test = *test_batches[k];
                Prediction pred = slot.name == "baseline"
                                      ? predict(*slot.baseline, test.features)
                                      : predict(*slot.model, test.features);
                const auto& concept_ids = slot.name == "baseline" ? slot.baseline->concept_ids
                                                                  : slot.model->concept_ids;
                const auto& class_ids =
                    slot.name == "baseline" ? slot.baseline->class_ids : slot.model->class_ids;
                concept_row.push_back(concept_accuracy(pred, test, concept_ids));
                class_row.push_back(class_accuracy(pred, test, class_ids));
            }
            slot.history.concept_acc.push_back(std::move(concept_row));
            slot.history.class_acc.push_back(std::move(class_row));
        }

        json progress;
        progress["phase"] = t;
        progress["config_echo"] = echo;
        json learner_entries = json::array();
        for (LearnerSlot& slot : slots) {
            std::string relative = "checkpoints/" + slot.name + "_phase_" + std::to_string(t) +
                                   ".ckpt";
            const ModelState snapshot = slot.name == "baseline"
                                            ? baseline_to_model(*slot.baseline)
                                            : *slot.model;
            save_checkpoint(snapshot, (out_dir / relative).string());
            learner_entries.push_back({{"name", slot.name},
                                       {"checkpoint", relative},
                                       {"history", history_to_json(slot.history)}});
        }
        progress["learners"] = std::move(learner_entries);
        spill((out_dir / ("progress_phase_" + std::to_string(t) + ".json")).string(),
              progress.dump(2) + "\n");

        if (options.stop_after_phase && *options.stop_after_phase == t) {
            RunResult result;
            for (LearnerSlot& slot : slots)
                result.learners.push_back({slot.name, std::move(slot.history)});
            result.completed = false;
            result.last_phase = t;
            result.output_dir = config.output_dir;
            return result;
        }
    }

    // Reports cover every phase, so they are written only on completion.
    std::string metrics_text = "phase,learner,metric,value\n";
    std::string curves_text = "learner,phase,task,concept_accuracy,class_accuracy\n";
    for (std::size_t t = 0; t < schedule.p; ++t)
        for (const LearnerSlot& slot : slots) {
            double cf = t == 0 ? 0.0 : concept_forget_rate(slot.history, t);
            double yf = t == 0 ? 0.0 : class_forget_rate(slot.history, t);
            metrics_text += std::to_string(t) + "," + slot.name + ",avg_concept_accuracy," +
                            format_double(avg_concept_accuracy(slot.history, t)) + "\n";
            metrics_text += std::to_string(t) + "," + slot.name + ",avg_class_accuracy," +
                            format_double(avg_class_accuracy(slot.history, t)) + "\n";
            metrics_text += std::to_string(t) + "," + slot.name + ",concept_forget_rate," +
                            format_double(cf) + "\n";
            metrics_text += std::to_string(t) + "," + slot.name + ",class_forget_rate," +
                            format_double(yf) + "\n";
        }
    for (const LearnerSlot& slot : slots)
        for (std::size_t t = 0; t < slot.history.concept_acc.size(); ++t)
            for (std::size_t k = 0; k <= t; ++k)
                curves_text += slot.name + "," + std::to_string(t) + "," + std::to_string(k) +
                               "," + format_double(slot.history.concept_acc[t][k]) + "," +
                               format_double(slot.history.class_acc[t][k]) + "\n";
    spill((out_dir / "metrics.csv").string(), metrics_text);
    spill((out_dir / "curves.csv").string(), curves_text);

    RunResult result;
    for (LearnerSlot& slot : slots) result.learners.push_back({slot.name, std::move(slot.history)});
    result.completed = true;
    result.last_phase = schedule.p - 1;
    result.output_dir = config.output_dir;
    return result;
}

} // namespace concil
