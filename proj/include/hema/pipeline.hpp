#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "hema/config.hpp"

namespace hema {

struct StageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommandOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::filesystem::path> model_dir;  // evaluate only
    bool verbose = false;
};

// Stage artifact names inside the output directory.
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kValidationFile = "validation_report.json";
inline constexpr const char* kSegmentManifestFile = "segment_manifest.json";
inline constexpr const char* kSegmentedDir = "segmented";
inline constexpr const char* kMaskDir = "masks";
inline constexpr const char* kModelDir = "model";
inline constexpr const char* kHistoryFile = "history.csv";
inline constexpr const char* kPredictionsFile = "predictions.csv";
inline constexpr const char* kMetricsFile = "metrics.json";
inline constexpr const char* kConfusionFile = "confusion.csv";
inline constexpr const char* kConfusionNormalizedFile = "confusion_normalized.csv";
inline constexpr const char* kCurvesDir = "curves";
inline constexpr const char* kComparisonMarkdownFile = "comparison.md";
inline constexpr const char* kComparisonCsvFile = "comparison.csv";

void run_prepare(const PipelineConfig& config, bool verbose = false);
void run_segment(const PipelineConfig& config, bool verbose = false);
void run_train(const PipelineConfig& config, bool verbose = false);
void run_evaluate(const PipelineConfig& config,
                  const std::optional<std::filesystem::path>& model_dir = std::nullopt,
                  bool verbose = false);
void run_report(const PipelineConfig& config, bool verbose = false);

// Dispatch for the CLI: prepare | segment | train | evaluate | report.
// Returns the process exit status; failures are reported on stderr.
int run_command(const std::string& command, PipelineConfig config,
                const CommandOverrides& overrides);

}  // namespace hema
