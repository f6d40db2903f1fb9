#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hema/dataset.hpp"

namespace hema {

// Scores are normalized class probabilities in class_order.
struct PredictionRow {
    std::string sample_id;
    ClassLabel true_label = ClassLabel::Normal;
    ClassLabel predicted_label = ClassLabel::Normal;
    std::vector<double> scores;
};

struct PredictionSet {
    std::vector<ClassLabel> class_order;
    std::vector<PredictionRow> rows;
};

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

// nullopt marks an undefined metric (zero denominator); silent zeros would
// corrupt comparison tables.
using Fraction = std::optional<double>;

ConfusionCounts confusion_counts(const PredictionSet& predictions, ClassLabel positive_class);

Fraction accuracy(const ConfusionCounts& c);     // (tp+tn)/total
Fraction precision(const ConfusionCounts& c);    // tp/(tp+fp)
Fraction recall(const ConfusionCounts& c);       // tp/(tp+fn)
Fraction specificity(const ConfusionCounts& c);  // tn/(tn+fp)

// Harmonic mean; 0 when both inputs are 0, undefined when either input is.
Fraction f1_score(Fraction precision, Fraction recall);

struct MetricsReport {
    ClassLabel positive_class = ClassLabel::Cancer;
    ConfusionCounts counts;
    Fraction accuracy;
    Fraction precision;
    Fraction recall;
    Fraction f1;
    Fraction specificity;
};

MetricsReport compute_metrics(const PredictionSet& predictions, ClassLabel positive_class);

// rows = true class, columns = predicted class
struct ConfusionMatrix {
    std::vector<ClassLabel> class_order;
    std::vector<std::vector<std::uint64_t>> counts;

    std::uint64_t total() const;
};

ConfusionMatrix confusion_matrix(const PredictionSet& predictions,
                                 const std::vector<ClassLabel>& class_order);

struct NormalizedMatrix {
    std::vector<ClassLabel> class_order;
    std::vector<std::vector<double>> rows;
    std::vector<bool> zero_row;  // rows with no samples stay all-zero and are flagged
};

NormalizedMatrix normalize_matrix(const ConfusionMatrix& m);

std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);

// CSV with a header row and leading column of class names.
std::string confusion_to_csv(const ConfusionMatrix& m);
std::string normalized_to_csv(const NormalizedMatrix& m);

}  // namespace hema
