#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hema/metrics.hpp"
#include "hema/training.hpp"

namespace hema {

struct ComparisonRow {
    std::string study;
    std::string methodology;
    std::string accuracy_text;
    std::string dataset;
};

// JSON array of {study, methodology, accuracy, dataset} objects.
std::vector<ComparisonRow> load_comparison_rows(const std::filesystem::path& file);

// Columns: Study | Methodology | Accuracy | Dataset. Rows must be
// non-empty; both formats carry identical cell text.
std::string comparison_markdown(const std::vector<ComparisonRow>& rows);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

// "97.3%" from a defined accuracy, "n/a" otherwise.
std::string accuracy_text(const Fraction& accuracy);

// One CSV per series (epoch,value), one point per epoch:
// curve_train_loss.csv, curve_val_loss.csv, curve_train_accuracy.csv,
// curve_val_accuracy.csv. CSV is the contract; no plot renderer is linked.
void render_history_curves(const TrainingHistory& history, const std::filesystem::path& out_dir);

}  // namespace hema
