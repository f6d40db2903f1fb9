#include "hema/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "hema/image_io.hpp"
#include "hema/metrics.hpp"
#include "hema/report.hpp"
#include "hema/rng.hpp"
#include "hema/training.hpp"
#include "hema/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hema {

namespace {

// One run at a time per output directory.
class OutDirLock {
public:
    explicit OutDirLock(const fs::path& out_dir) : lock_path_(out_dir / ".lock") {
        fs::create_directories(out_dir);
        const int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0) {
            throw StageError("output directory is locked by another run: " + lock_path_.string() +
                             " (remove the file if that run is gone)");
        }
        ::close(fd);
    }
    ~OutDirLock() {
        std::error_code ec;
        fs::remove(lock_path_, ec);
    }
    OutDirLock(const OutDirLock&) = delete;
    OutDirLock& operator=(const OutDirLock&) = delete;

private:
    fs::path lock_path_;
};

void require_artifact(const fs::path& path, const std::string& producer) {
    if (!fs::exists(path)) {
        throw StageError("missing " + path.filename().string() + " (expected at " + path.string() +
                         "); run `hemapipe " + producer + "` first");
    }
}

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string bytes = buffer.str();
    return hex64(fnv1a64(bytes));
}

void write_run_meta(const PipelineConfig& config, const std::string& command, json extras) {
    json j;
    j["tool_version"] = tool_id();
    j["command"] = command;
    j["seed"] = config.seed;
    j["config_digest"] = config.config_digest;
    for (auto& [key, value] : extras.items()) j[key] = value;
    std::ofstream out(config.out_dir / ("run_meta_" + command + ".json"));
    if (!out) throw StageError("cannot write run metadata for " + command);
    out << j.dump(2) << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StageError("cannot write " + path.string());
    out << text;
}

json validation_to_json(const std::string& dataset, const ValidationReport& report) {
    json j;
    j["dataset"] = dataset;
    j["pass"] = report.pass;
    j["entries"] = json::array();
    for (const auto& entry : report.entries) {
        json je;
        je["class"] = entry.class_name;
        je["expected"] = entry.expected ? json(*entry.expected) : json(nullptr);
        je["actual"] = entry.actual ? json(*entry.actual) : json(nullptr);
        je["delta"] = entry.delta;
        je["ok"] = entry.ok;
        j["entries"].push_back(je);
    }
    j["warnings"] = report.warnings;
    return j;
}

}  // namespace

void run_prepare(const PipelineConfig& config, bool verbose) {
    OutDirLock lock(config.out_dir);

    IngestOptions ingest_options;
    ingest_options.verify_decode = config.verify_decode;

    json validations = json::array();
    bool all_valid = true;
    DatasetManifest merged = empty_manifest();
    for (const auto& entry : config.datasets) {
        DatasetManifest manifest = ingest_dataset(entry.root, entry.kind, ingest_options);
        if (verbose) {
            std::cout << "prepare: ingested " << manifest.records.size() << " records from "
                      << entry.root << "\n";
        }
        if (!entry.expected_counts.empty()) {
            const auto report = validate_manifest(manifest, entry.expected_counts);
            validations.push_back(validation_to_json(to_string(entry.kind), report));
            if (!report.pass) {
                all_valid = false;
                std::cerr << "prepare: counts for " << to_string(entry.kind)
                          << " do not match the expectations\n";
            }
        }
        merged = merge_manifests(merged, manifest, config.class_map);
    }

    const auto assignment = stratified_split(merged, config.split_ratios, config.seed);
    apply_split(merged, assignment);
    save_manifest(merged, config.out_dir / kManifestFile);

    if (!validations.empty()) {
        json j;
        j["pass"] = all_valid;
        j["datasets"] = validations;
        write_text(config.out_dir / kValidationFile, j.dump(2) + "\n");
    }

    json split_counts;
    for (const auto& [split, counts] : assignment.per_split_counts) {
        split_counts[split] = counts;
    }
    write_run_meta(config, "prepare",
                   {{"class_counts", merged.class_counts}, {"split_counts", split_counts}});

    std::cout << "prepare: " << merged.records.size() << " records";
    for (const auto& [name, count] : merged.class_counts) {
        std::cout << " " << name << "=" << count;
    }
    std::cout << "\n";
}

void run_segment(const PipelineConfig& config, bool verbose) {
    OutDirLock lock(config.out_dir);
    const auto manifest_path = config.out_dir / kManifestFile;
    require_artifact(manifest_path, "prepare");

    DatasetManifest manifest = load_manifest(manifest_path);
    std::size_t fallbacks = 0;
    for (auto& record : manifest.records) {
        const Image image = load_image(record.path);
        const SegmentedImage segmented = segment_sample(image, config.segmentation);
        if (segmented.fallback_used) ++fallbacks;

        const fs::path rel = fs::path(to_string(record.source_dataset)) /
                             to_string(record.original_class) /
                             (record.path.stem().string() + ".png");
        const fs::path out_path = config.out_dir / kSegmentedDir / rel;
        fs::create_directories(out_path.parent_path());
        save_image(segmented.image, out_path);
        if (config.write_masks) {
            const fs::path mask_path = config.out_dir / kMaskDir / rel;
            fs::create_directories(mask_path.parent_path());
            save_mask_png(segmented.mask, mask_path);
        }
        if (verbose) {
            std::cout << "segment: " << record.sample_id << " foreground "
                      << segmented.foreground_fraction
                      << (segmented.fallback_used ? " (fallback)" : "") << "\n";
        }
        record.path = fs::absolute(out_path);
    }
    save_manifest(manifest, config.out_dir / kSegmentManifestFile);

    write_run_meta(config, "segment",
                   {{"segmentation", segmentation_to_json(config.segmentation)},
                    {"segmented_splits", {"train", "val", "test"}},
                    {"fallback_count", fallbacks},
                    {"write_masks", config.write_masks}});
    std::cout << "segment: " << manifest.records.size() << " images, " << fallbacks
              << " fallbacks\n";
}

void run_train(const PipelineConfig& config, bool verbose) {
    OutDirLock lock(config.out_dir);
    const auto manifest_path = config.out_dir / kSegmentManifestFile;
    require_artifact(manifest_path, "segment");

    const DatasetManifest manifest = load_manifest(manifest_path);
    const auto train_records = records_in_split(manifest, Split::train);
    const auto val_records = records_in_split(manifest, Split::val);

    BackendOptions options;
    options.num_classes = 2;
    options.input_resolution = config.training.input_resolution;
    options.seed = config.training.seed;
    std::shared_ptr<ClassifierBackend> backend = load_backend(config.backend_name, options);

    const auto pipeline = config.augmentation();
    auto [model, history] = fine_tune(backend, train_records, val_records, config.training,
                                      pipeline, file_digest(manifest_path));

    save_model(model, config.out_dir / kModelDir);
    save_history_csv(history, config.out_dir / kHistoryFile);

    write_run_meta(config, "train",
                   {{"backend", config.backend_name},
                    {"augmented_splits", {"train"}},
                    {"best_epoch", model.best_epoch},
                    {"best_val_accuracy", model.best_val_accuracy}});
    if (verbose) {
        for (const auto& record : history.epochs) {
            std::cout << "train: epoch " << record.epoch << " loss " << record.train_loss
                      << " acc " << record.train_accuracy << " val_acc " << record.val_accuracy
                      << "\n";
        }
    }
    std::cout << "train: " << history.epochs.size() << " epochs, best val accuracy "
              << model.best_val_accuracy << " (epoch " << model.best_epoch << ")\n";
}

void run_evaluate(const PipelineConfig& config, const std::optional<fs::path>& model_dir,
                  bool verbose) {
    OutDirLock lock(config.out_dir);
    const auto manifest_path = config.out_dir / kSegmentManifestFile;
    require_artifact(manifest_path, "segment");
    const fs::path model_path = model_dir.value_or(config.out_dir / kModelDir);
    require_artifact(model_path / "model.json", "train");

    const TrainedModel model = load_model(model_path);
    if (!model.manifest_digest.empty() && model.manifest_digest != file_digest(manifest_path)) {
        throw StageError("model at " + model_path.string() +
                         " was trained on a different manifest than " + manifest_path.string());
    }

    const DatasetManifest manifest = load_manifest(manifest_path);
    const auto records = records_in_split(manifest, split_from_string(config.evaluate_split_name));
    if (records.empty()) {
        throw StageError("split '" + config.evaluate_split_name + "' has no records");
    }

    const PredictionSet predictions = evaluate_split(model, records);
    save_predictions_csv(predictions, config.out_dir / kPredictionsFile);

    const MetricsReport report = compute_metrics(predictions, config.positive_class);
    write_text(config.out_dir / kMetricsFile, metrics_to_json(report));

    const ConfusionMatrix matrix = confusion_matrix(predictions, model.class_order);
    write_text(config.out_dir / kConfusionFile, confusion_to_csv(matrix));
    const NormalizedMatrix normalized = normalize_matrix(matrix);
    write_text(config.out_dir / kConfusionNormalizedFile, normalized_to_csv(normalized));
    for (std::size_t i = 0; i < normalized.zero_row.size(); ++i) {
        if (normalized.zero_row[i]) {
            std::cerr << "evaluate: class " << to_string(normalized.class_order[i])
                      << " has no samples in this split; its normalized row stays zero\n";
        }
    }

    write_run_meta(config, "evaluate",
                   {{"split", config.evaluate_split_name},
                    {"positive_class", to_string(config.positive_class)},
                    {"samples", predictions.rows.size()}});
    if (verbose) {
        for (const auto& row : predictions.rows) {
            std::cout << "evaluate: " << row.sample_id << " true " << to_string(row.true_label)
                      << " predicted " << to_string(row.predicted_label) << "\n";
        }
    }
    std::cout << "evaluate: " << predictions.rows.size() << " samples, accuracy "
              << accuracy_text(report.accuracy) << "\n";
}

void run_report(const PipelineConfig& config, bool verbose) {
    OutDirLock lock(config.out_dir);
    const auto history_path = config.out_dir / kHistoryFile;
    require_artifact(history_path, "train");
    const auto metrics_path = config.out_dir / kMetricsFile;
    require_artifact(metrics_path, "evaluate");

    const TrainingHistory history = load_history_csv(history_path);
    render_history_curves(history, config.out_dir / kCurvesDir);

    if (config.comparison_rows_file.empty()) {
        throw StageError("report.comparison_rows is not set in the config");
    }
    auto rows = load_comparison_rows(config.comparison_rows_file);

    std::ifstream metrics_in(metrics_path);
    std::stringstream metrics_buffer;
    metrics_buffer << metrics_in.rdbuf();
    const MetricsReport metrics = metrics_from_json(metrics_buffer.str());

    ComparisonRow own;
    own.study = "This pipeline";
    own.methodology = config.backend_name + " on HSV-segmented smears";
    own.accuracy_text = accuracy_text(metrics.accuracy);
    std::string datasets;
    for (const auto& entry : config.datasets) {
        if (!datasets.empty()) datasets += " + ";
        datasets += to_string(entry.kind);
    }
    own.dataset = datasets;
    rows.push_back(own);

    write_text(config.out_dir / kComparisonMarkdownFile, comparison_markdown(rows));
    write_text(config.out_dir / kComparisonCsvFile, comparison_csv(rows));

    write_run_meta(config, "report",
                   {{"comparison_rows", rows.size()}, {"curves_epochs", history.epochs.size()}});
    if (verbose) {
        std::cout << comparison_markdown(rows);
    }
    std::cout << "report: " << history.epochs.size() << " epochs charted, " << rows.size()
              << " comparison rows\n";
}

int run_command(const std::string& command, PipelineConfig config,
                const CommandOverrides& overrides) {
    if (overrides.seed) {
        config.seed = *overrides.seed;
        config.training.seed = *overrides.seed;
    }
    if (overrides.out_dir) config.out_dir = *overrides.out_dir;

    try {
        if (command == "prepare") {
            run_prepare(config, overrides.verbose);
        } else if (command == "segment") {
            run_segment(config, overrides.verbose);
        } else if (command == "train") {
            run_train(config, overrides.verbose);
        } else if (command == "evaluate") {
            run_evaluate(config, overrides.model_dir, overrides.verbose);
        } else if (command == "report") {
            run_report(config, overrides.verbose);
        } else {
            std::cerr << "unknown command: " << command << "\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace hema
