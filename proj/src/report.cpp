#include "hema/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hema/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hema {

std::vector<ComparisonRow> load_comparison_rows(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read comparison rows: " + file.string());
    json j;
    in >> j;
    std::vector<ComparisonRow> rows;
    for (const auto& jr : j) {
        ComparisonRow row;
        row.study = jr.at("study").get<std::string>();
        row.methodology = jr.at("methodology").get<std::string>();
        row.accuracy_text = jr.at("accuracy").get<std::string>();
        row.dataset = jr.at("dataset").get<std::string>();
        if (row.study.empty() || row.accuracy_text.empty()) {
            throw std::runtime_error("comparison row needs a study name and accuracy text");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string comparison_markdown(const std::vector<ComparisonRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("comparison table needs at least one row");
    std::string out = "| Study | Methodology | Accuracy | Dataset |\n";
    out += "| --- | --- | --- | --- |\n";
    for (const auto& row : rows) {
        out += "| " + row.study + " | " + row.methodology + " | " + row.accuracy_text + " | " +
               row.dataset + " |\n";
    }
    return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("comparison table needs at least one row");
    std::string out = "Study,Methodology,Accuracy,Dataset\n";
    for (const auto& row : rows) {
        out += csv_escape(row.study) + "," + csv_escape(row.methodology) + "," +
               csv_escape(row.accuracy_text) + "," + csv_escape(row.dataset) + "\n";
    }
    return out;
}

std::string accuracy_text(const Fraction& accuracy) {
    if (!accuracy) return "n/a";
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(1);
    out << (*accuracy * 100.0) << "%";
    return out.str();
}

void render_history_curves(const TrainingHistory& history, const fs::path& out_dir) {
    if (history.epochs.empty()) {
        throw std::invalid_argument("cannot render curves from an empty history");
    }
    fs::create_directories(out_dir);
    const auto write_series = [&](const std::string& name, auto getter) {
        std::ofstream out(out_dir / ("curve_" + name + ".csv"));
        if (!out) throw std::runtime_error("cannot write curve: " + name);
        out << "epoch," << name << "\n";
        for (const auto& record : history.epochs) {
            out << record.epoch << ',' << fmt_double(getter(record)) << "\n";
        }
    };
    write_series("train_loss", [](const EpochRecord& r) { return r.train_loss; });
    write_series("val_loss", [](const EpochRecord& r) { return r.val_loss; });
    write_series("train_accuracy", [](const EpochRecord& r) { return r.train_accuracy; });
    write_series("val_accuracy", [](const EpochRecord& r) { return r.val_accuracy; });
}

}  // namespace hema
