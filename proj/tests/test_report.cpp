#include <doctest.h>

#include "hema/csv.hpp"
#include "hema/report.hpp"
#include "test_util.hpp"

using namespace hema;
using testutil::TempDir;

namespace {

std::vector<std::vector<std::string>> parse_markdown_cells(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t start = 0;
    int line_no = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line_no == 2 || line.empty()) continue;  // separator row
        std::vector<std::string> cells;
        std::size_t pos = 1;  // skip leading pipe
        while (pos < line.size()) {
            auto next = line.find('|', pos);
            if (next == std::string::npos) break;
            std::string cell = line.substr(pos, next - pos);
            while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
            while (!cell.empty() && cell.back() == ' ') cell.pop_back();
            cells.push_back(cell);
            pos = next + 1;
        }
        rows.push_back(cells);
    }
    return rows;
}

std::vector<ComparisonRow> sample_rows() {
    return {
        {"First study", "A small CNN", "91%", "set A"},
        {"Second study", "Transfer, fine-tuned", "97.1%", "set A + set B"},
    };
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("markdown and csv carry identical cell text") {
    auto rows = sample_rows();
    rows.push_back({"Commas, Inc.", "uses \"quotes\" and, commas", ">95%", "set C"});
    const auto md_cells = parse_markdown_cells(comparison_markdown(rows));
    const auto csv_text = comparison_csv(rows);

    std::vector<std::vector<std::string>> csv_cells;
    std::size_t start = 0;
    while (start < csv_text.size()) {
        auto end = csv_text.find('\n', start);
        if (end == std::string::npos) end = csv_text.size();
        const std::string line = csv_text.substr(start, end - start);
        start = end + 1;
        if (!line.empty()) csv_cells.push_back(split_csv_line(line));
    }

    REQUIRE(md_cells.size() == csv_cells.size());
    REQUIRE(md_cells.size() == rows.size() + 1);  // header included
    for (std::size_t i = 0; i < md_cells.size(); ++i) {
        REQUIRE(md_cells[i].size() == 4);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(md_cells[i][j] == csv_cells[i][j]);
        }
    }
}

TEST_CASE("column order is Study, Methodology, Accuracy, Dataset") {
    const auto text = comparison_csv(sample_rows());
    CHECK(text.rfind("Study,Methodology,Accuracy,Dataset\n", 0) == 0);
    const auto md = comparison_markdown(sample_rows());
    CHECK(md.rfind("| Study | Methodology | Accuracy | Dataset |\n", 0) == 0);
}

TEST_CASE("a single-row table is valid") {
    const std::vector<ComparisonRow> rows = {{"Only study", "baseline", "50%", "toy"}};
    const auto cells = parse_markdown_cells(comparison_markdown(rows));
    REQUIRE(cells.size() == 2);
    CHECK(cells[1][0] == "Only study");
}

TEST_CASE("an empty table is rejected") {
    CHECK_THROWS_AS(comparison_markdown({}), std::invalid_argument);
    CHECK_THROWS_AS(comparison_csv({}), std::invalid_argument);
}

TEST_CASE("accuracy text formats percentages and undefined values") {
    CHECK(accuracy_text(0.973) == "97.3%");
    CHECK(accuracy_text(1.0) == "100.0%");
    CHECK(accuracy_text(std::nullopt) == "n/a");
}

TEST_CASE("comparison rows load from their json file") {
    TempDir tmp("rows");
    testutil::write_file(tmp.path() / "rows.json",
                         R"([{"study":"S","methodology":"M","accuracy":"90%","dataset":"D"}])");
    const auto rows = load_comparison_rows(tmp.path() / "rows.json");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].study == "S");
    CHECK(rows[0].accuracy_text == "90%");

    testutil::write_file(tmp.path() / "bad.json",
                         R"([{"study":"","methodology":"M","accuracy":"90%","dataset":"D"}])");
    CHECK_THROWS(load_comparison_rows(tmp.path() / "bad.json"));
}

TEST_CASE("history curves emit one point per epoch per series") {
    TempDir tmp("curves");
    TrainingHistory history;
    history.epochs.push_back({1, 0.9, 0.95, 0.5, 0.4, 0.0});
    history.epochs.push_back({2, 0.7, 0.8, 0.7, 0.6, 0.0});
    history.epochs.push_back({3, 0.5, 0.6, 0.9, 0.8, 0.0});
    render_history_curves(history, tmp.path());

    for (const std::string name :
         {"train_loss", "val_loss", "train_accuracy", "val_accuracy"}) {
        const auto file = tmp.path() / ("curve_" + name + ".csv");
        REQUIRE(std::filesystem::exists(file));
        const auto text = testutil::read_file(file);
        CHECK(std::count(text.begin(), text.end(), '\n') == 4);  // header + 3 epochs
    }

    const auto text = testutil::read_file(tmp.path() / "curve_train_loss.csv");
    CHECK(text == "epoch,train_loss\n1,0.9\n2,0.7\n3,0.5\n");
}

TEST_CASE("a single-epoch history renders without trouble") {
    TempDir tmp("curves1");
    TrainingHistory history;
    history.epochs.push_back({1, 0.9, 0.95, 0.5, 0.4, 0.0});
    CHECK_NOTHROW(render_history_curves(history, tmp.path()));
}

TEST_CASE("an empty history cannot be rendered") {
    TempDir tmp("curves0");
    CHECK_THROWS_AS(render_history_curves(TrainingHistory{}, tmp.path()),
                    std::invalid_argument);
}

}  // TEST_SUITE
