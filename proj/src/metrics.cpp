#include "hema/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "hema/csv.hpp"

using nlohmann::json;

namespace hema {

namespace {

std::size_t class_index(const std::vector<ClassLabel>& order, ClassLabel label) {
    const auto it = std::find(order.begin(), order.end(), label);
    if (it == order.end()) {
        throw std::runtime_error(std::string("label outside class set: ") + to_string(label));
    }
    return static_cast<std::size_t>(it - order.begin());
}

}  // namespace

ConfusionCounts confusion_counts(const PredictionSet& predictions, ClassLabel positive_class) {
    ConfusionCounts c;
    for (const auto& row : predictions.rows) {
        class_index(predictions.class_order, row.true_label);
        class_index(predictions.class_order, row.predicted_label);
        const bool actual_pos = row.true_label == positive_class;
        const bool predicted_pos = row.predicted_label == positive_class;
        if (actual_pos && predicted_pos) ++c.tp;
        else if (!actual_pos && !predicted_pos) ++c.tn;
        else if (!actual_pos && predicted_pos) ++c.fp;
        else ++c.fn;
    }
    return c;
}

Fraction accuracy(const ConfusionCounts& c) {
    const auto total = c.total();
    if (total == 0) return std::nullopt;
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

Fraction precision(const ConfusionCounts& c) {
    if (c.tp + c.fp == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

Fraction recall(const ConfusionCounts& c) {
    if (c.tp + c.fn == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

Fraction specificity(const ConfusionCounts& c) {
    if (c.tn + c.fp == 0) return std::nullopt;
    return static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
}

Fraction f1_score(Fraction precision, Fraction recall) {
    if (!precision || !recall) return std::nullopt;
    const double p = *precision;
    const double r = *recall;
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

MetricsReport compute_metrics(const PredictionSet& predictions, ClassLabel positive_class) {
    MetricsReport report;
    report.positive_class = positive_class;
    report.counts = confusion_counts(predictions, positive_class);
    report.accuracy = accuracy(report.counts);
    report.precision = precision(report.counts);
    report.recall = recall(report.counts);
    report.f1 = f1_score(report.precision, report.recall);
    report.specificity = specificity(report.counts);
    return report;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t n = 0;
    for (const auto& row : counts) {
        for (auto cell : row) n += cell;
    }
    return n;
}

ConfusionMatrix confusion_matrix(const PredictionSet& predictions,
                                 const std::vector<ClassLabel>& class_order) {
    ConfusionMatrix m;
    m.class_order = class_order;
    m.counts.assign(class_order.size(), std::vector<std::uint64_t>(class_order.size(), 0));
    for (const auto& row : predictions.rows) {
        const auto i = class_index(class_order, row.true_label);
        const auto j = class_index(class_order, row.predicted_label);
        ++m.counts[i][j];
    }
    return m;
}

NormalizedMatrix normalize_matrix(const ConfusionMatrix& m) {
    NormalizedMatrix out;
    out.class_order = m.class_order;
    out.rows.assign(m.counts.size(), std::vector<double>(m.class_order.size(), 0.0));
    out.zero_row.assign(m.counts.size(), false);
    for (std::size_t i = 0; i < m.counts.size(); ++i) {
        std::uint64_t row_sum = 0;
        for (auto cell : m.counts[i]) row_sum += cell;
        if (row_sum == 0) {
            out.zero_row[i] = true;
            continue;
        }
        for (std::size_t j = 0; j < m.counts[i].size(); ++j) {
            out.rows[i][j] = static_cast<double>(m.counts[i][j]) / static_cast<double>(row_sum);
        }
    }
    return out;
}

namespace {

json fraction_to_json(const Fraction& f) {
    return f ? json(*f) : json(nullptr);
}

Fraction fraction_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace

std::string metrics_to_json(const MetricsReport& report) {
    json j;
    j["positive_class"] = to_string(report.positive_class);
    j["counts"] = {{"tp", report.counts.tp},
                   {"tn", report.counts.tn},
                   {"fp", report.counts.fp},
                   {"fn", report.counts.fn}};
    j["accuracy"] = fraction_to_json(report.accuracy);
    j["precision"] = fraction_to_json(report.precision);
    j["recall"] = fraction_to_json(report.recall);
    j["f1"] = fraction_to_json(report.f1);
    j["specificity"] = fraction_to_json(report.specificity);
    return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& text) {
    const json j = json::parse(text);
    MetricsReport report;
    report.positive_class = class_label_from_string(j.at("positive_class").get<std::string>());
    report.counts.tp = j.at("counts").at("tp").get<std::uint64_t>();
    report.counts.tn = j.at("counts").at("tn").get<std::uint64_t>();
    report.counts.fp = j.at("counts").at("fp").get<std::uint64_t>();
    report.counts.fn = j.at("counts").at("fn").get<std::uint64_t>();
    report.accuracy = fraction_from_json(j.at("accuracy"));
    report.precision = fraction_from_json(j.at("precision"));
    report.recall = fraction_from_json(j.at("recall"));
    report.f1 = fraction_from_json(j.at("f1"));
    report.specificity = fraction_from_json(j.at("specificity"));
    return report;
}

std::string confusion_to_csv(const ConfusionMatrix& m) {
    std::string out = "class";
    for (auto label : m.class_order) out += std::string(",") + to_string(label);
    out += "\n";
    for (std::size_t i = 0; i < m.counts.size(); ++i) {
        out += to_string(m.class_order[i]);
        for (auto cell : m.counts[i]) out += "," + std::to_string(cell);
        out += "\n";
    }
    return out;
}

std::string normalized_to_csv(const NormalizedMatrix& m) {
    std::string out = "class";
    for (auto label : m.class_order) out += std::string(",") + to_string(label);
    out += "\n";
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        out += to_string(m.class_order[i]);
        for (auto cell : m.rows[i]) out += "," + fmt_double(cell);
        out += "\n";
    }
    return out;
}

}  // namespace hema
