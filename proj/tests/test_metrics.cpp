#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "hema/metrics.hpp"
#include "hema/rng.hpp"

using namespace hema;

namespace {

// Independent tally used as the oracle for confusion_counts.
ConfusionCounts tally_oracle(const PredictionSet& predictions, ClassLabel positive) {
    ConfusionCounts c;
    for (const auto& row : predictions.rows) {
        if (row.true_label == positive) {
            if (row.predicted_label == positive) ++c.tp;
            else ++c.fn;
        } else {
            if (row.predicted_label == positive) ++c.fp;
            else ++c.tn;
        }
    }
    return c;
}

PredictionSet random_predictions(Rng& rng, const std::vector<ClassLabel>& classes,
                                 std::size_t rows) {
    PredictionSet out;
    out.class_order = classes;
    for (std::size_t i = 0; i < rows; ++i) {
        PredictionRow row;
        row.sample_id = "s" + std::to_string(i);
        row.true_label = classes[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(classes.size()) - 1))];
        row.predicted_label = classes[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(classes.size()) - 1))];
        out.rows.push_back(row);
    }
    return out;
}

ConfusionCounts swap_positive(const ConfusionCounts& c) {
    return ConfusionCounts{c.tn, c.tp, c.fn, c.fp};
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("accuracy of a perfect classifier is 1") {
    CHECK(accuracy({2, 2, 0, 0}) == 1.0);
}

TEST_CASE("accuracy of an always-wrong classifier is 0") {
    CHECK(accuracy({0, 0, 3, 7}) == 0.0);
}

TEST_CASE("accuracy matches a tally over 100 synthetic rows") {
    PredictionSet predictions;
    predictions.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    auto add = [&](ClassLabel t, ClassLabel p, int n) {
        for (int i = 0; i < n; ++i) {
            predictions.rows.push_back({"r" + std::to_string(predictions.rows.size()), t, p, {}});
        }
    };
    add(ClassLabel::Cancer, ClassLabel::Cancer, 45);
    add(ClassLabel::Normal, ClassLabel::Normal, 40);
    add(ClassLabel::Normal, ClassLabel::Cancer, 5);
    add(ClassLabel::Cancer, ClassLabel::Normal, 10);

    const auto counts = confusion_counts(predictions, ClassLabel::Cancer);
    CHECK(counts == ConfusionCounts{45, 40, 5, 10});
    CHECK(counts == tally_oracle(predictions, ClassLabel::Cancer));
    CHECK(accuracy(counts) == 0.85);
}

TEST_CASE("precision edge values and ratio") {
    CHECK(precision({5, 0, 0, 0}) == 1.0);
    CHECK(precision({0, 0, 4, 0}) == 0.0);
    CHECK(precision({30, 0, 10, 0}) == 0.75);
}

TEST_CASE("recall edge values and ratio") {
    CHECK(recall({7, 0, 0, 0}) == 1.0);
    CHECK(recall({0, 0, 0, 5}) == 0.0);
    CHECK(recall({30, 0, 0, 20}) == 0.6);
}

TEST_CASE("specificity edge values and ratio") {
    CHECK(specificity({0, 9, 0, 0}) == 1.0);
    CHECK(specificity({0, 0, 2, 0}) == 0.0);
    CHECK(specificity({0, 40, 10, 0}) == 0.8);
}

TEST_CASE("f1 of equal precision and recall is that value") {
    for (double x : {0.1, 0.5, 0.9, 1.0}) {
        CHECK(*f1_score(x, x) == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("f1 of (1.0, 0.5) is two thirds") {
    CHECK(*f1_score(1.0, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("f1 is 0 when precision and recall are both 0") {
    CHECK(f1_score(0.0, 0.0) == 0.0);
}

TEST_CASE("undefined denominators return the undefined marker") {
    CHECK(!accuracy({0, 0, 0, 0}));
    CHECK(!precision({0, 0, 0, 5}));
    CHECK(!recall({0, 3, 2, 0}));
    CHECK(!specificity({4, 0, 0, 2}));
    CHECK(!f1_score(std::nullopt, 0.5));
    CHECK(!f1_score(0.5, std::nullopt));
}

TEST_CASE("metric formulas match an independent evaluation on random counts") {
    Rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        ConfusionCounts c;
        c.tp = static_cast<std::uint64_t>(rng.uniform_int(0, 50));
        c.tn = static_cast<std::uint64_t>(rng.uniform_int(0, 50));
        c.fp = static_cast<std::uint64_t>(rng.uniform_int(0, 50));
        c.fn = static_cast<std::uint64_t>(rng.uniform_int(0, 50));

        const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
        const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
        if (c.total() > 0) {
            CHECK(std::abs(*accuracy(c) - (tp + tn) / (tp + tn + fp + fn)) <= 1e-12);
        }
        if (c.tp + c.fp > 0) CHECK(std::abs(*precision(c) - tp / (tp + fp)) <= 1e-12);
        if (c.tp + c.fn > 0) CHECK(std::abs(*recall(c) - tp / (tp + fn)) <= 1e-12);
        if (c.tn + c.fp > 0) CHECK(std::abs(*specificity(c) - tn / (tn + fp)) <= 1e-12);
        const auto p = precision(c);
        const auto r = recall(c);
        if (p && r && *p + *r > 0.0) {
            CHECK(std::abs(*f1_score(p, r) - 2.0 * *p * *r / (*p + *r)) <= 1e-12);
        }
    }
}

TEST_CASE("class swap exchanges recall and specificity and keeps accuracy") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        ConfusionCounts c;
        c.tp = static_cast<std::uint64_t>(rng.uniform_int(0, 20));
        c.tn = static_cast<std::uint64_t>(rng.uniform_int(0, 20));
        c.fp = static_cast<std::uint64_t>(rng.uniform_int(0, 20));
        c.fn = static_cast<std::uint64_t>(rng.uniform_int(0, 20));
        const auto swapped = swap_positive(c);
        CHECK(recall(c) == specificity(swapped));
        CHECK(specificity(c) == recall(swapped));
        CHECK(accuracy(c) == accuracy(swapped));
    }
}

TEST_CASE("f1 lies between min and max of precision and recall") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double p = rng.uniform(0.0, 1.0);
        const double r = rng.uniform(0.0, 1.0);
        const auto f = f1_score(p, r);
        REQUIRE(f.has_value());
        CHECK(*f >= std::min(p, r) - 1e-12);
        CHECK(*f <= std::max(p, r) + 1e-12);
    }
}

TEST_CASE("confusion_counts totals the prediction set") {
    Rng rng(3);
    const std::vector<ClassLabel> classes = {ClassLabel::Normal, ClassLabel::Cancer};
    const auto predictions = random_predictions(rng, classes, 20);
    const auto counts = confusion_counts(predictions, ClassLabel::Cancer);
    CHECK(counts.total() == predictions.rows.size());
    CHECK(counts == tally_oracle(predictions, ClassLabel::Cancer));
}

TEST_CASE("all-correct predictions have no false counts") {
    PredictionSet predictions;
    predictions.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    predictions.rows.push_back({"a", ClassLabel::Cancer, ClassLabel::Cancer, {}});
    predictions.rows.push_back({"b", ClassLabel::Normal, ClassLabel::Normal, {}});
    const auto counts = confusion_counts(predictions, ClassLabel::Cancer);
    CHECK(counts.fp == 0);
    CHECK(counts.fn == 0);
}

TEST_CASE("empty prediction set tallies to zero") {
    PredictionSet predictions;
    predictions.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    CHECK(confusion_counts(predictions, ClassLabel::Cancer) == ConfusionCounts{});
}

TEST_CASE("label outside the class set is an error") {
    PredictionSet predictions;
    predictions.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    predictions.rows.push_back({"a", ClassLabel::Pro, ClassLabel::Cancer, {}});
    CHECK_THROWS(confusion_counts(predictions, ClassLabel::Cancer));
    CHECK_THROWS(confusion_matrix(predictions, predictions.class_order));
}

TEST_CASE("confusion matrix of all-correct predictions is diagonal") {
    PredictionSet predictions;
    predictions.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    for (int i = 0; i < 4; ++i) {
        predictions.rows.push_back({"n" + std::to_string(i), ClassLabel::Normal,
                                    ClassLabel::Normal, {}});
        predictions.rows.push_back({"c" + std::to_string(i), ClassLabel::Cancer,
                                    ClassLabel::Cancer, {}});
    }
    const auto m = confusion_matrix(predictions, predictions.class_order);
    CHECK(m.counts[0][0] == 4);
    CHECK(m.counts[1][1] == 4);
    CHECK(m.counts[0][1] == 0);
    CHECK(m.counts[1][0] == 0);
    CHECK(m.total() == 8);
}

TEST_CASE("empty prediction set gives the zero matrix") {
    PredictionSet predictions;
    predictions.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    const auto m = confusion_matrix(predictions, predictions.class_order);
    CHECK(m.total() == 0);
}

TEST_CASE("random confusion matrix equals a brute-force nested tally") {
    Rng rng(99);
    const std::vector<ClassLabel> classes = {ClassLabel::Benign, ClassLabel::Early,
                                             ClassLabel::Pre};
    const auto predictions = random_predictions(rng, classes, 30);
    const auto m = confusion_matrix(predictions, classes);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        for (std::size_t j = 0; j < classes.size(); ++j) {
            std::uint64_t expected = 0;
            for (const auto& row : predictions.rows) {
                if (row.true_label == classes[i] && row.predicted_label == classes[j]) {
                    ++expected;
                }
            }
            CHECK(m.counts[i][j] == expected);
        }
    }
}

TEST_CASE("normalizing an identity-count matrix yields the identity") {
    ConfusionMatrix m;
    m.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    m.counts = {{5, 0}, {0, 7}};
    const auto n = normalize_matrix(m);
    CHECK(n.rows[0][0] == 1.0);
    CHECK(n.rows[1][1] == 1.0);
    CHECK(n.rows[0][1] == 0.0);
    CHECK(!n.zero_row[0]);
}

TEST_CASE("row [3, 1] normalizes to [0.75, 0.25]") {
    ConfusionMatrix m;
    m.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    m.counts = {{3, 1}, {0, 2}};
    const auto n = normalize_matrix(m);
    CHECK(n.rows[0][0] == 0.75);
    CHECK(n.rows[0][1] == 0.25);
}

TEST_CASE("six percent of misread healthy rows show up as a 0.06 cell") {
    PredictionSet predictions;
    predictions.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    for (int i = 0; i < 94; ++i) {
        predictions.rows.push_back({"n" + std::to_string(i), ClassLabel::Normal,
                                    ClassLabel::Normal, {}});
    }
    for (int i = 0; i < 6; ++i) {
        predictions.rows.push_back({"x" + std::to_string(i), ClassLabel::Normal,
                                    ClassLabel::Cancer, {}});
    }
    for (int i = 0; i < 50; ++i) {
        predictions.rows.push_back({"c" + std::to_string(i), ClassLabel::Cancer,
                                    ClassLabel::Cancer, {}});
    }
    const auto n = normalize_matrix(confusion_matrix(predictions, predictions.class_order));
    CHECK(n.rows[0][0] == doctest::Approx(0.94).epsilon(1e-12));
    CHECK(n.rows[0][1] == doctest::Approx(0.06).epsilon(1e-12));
}

TEST_CASE("zero rows stay zero and are flagged") {
    ConfusionMatrix m;
    m.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    m.counts = {{0, 0}, {1, 3}};
    const auto n = normalize_matrix(m);
    CHECK(n.zero_row[0]);
    CHECK(!n.zero_row[1]);
    CHECK(n.rows[0][0] == 0.0);
    CHECK(n.rows[1][0] + n.rows[1][1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("metrics report serializes undefined values as null and round-trips") {
    PredictionSet predictions;
    predictions.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    predictions.rows.push_back({"a", ClassLabel::Normal, ClassLabel::Normal, {}});
    const auto report = compute_metrics(predictions, ClassLabel::Cancer);
    CHECK(!report.precision);  // no positive predictions at all
    CHECK(!report.recall);

    const auto text = metrics_to_json(report);
    const auto back = metrics_from_json(text);
    CHECK(back.counts == report.counts);
    CHECK(back.accuracy == report.accuracy);
    CHECK(back.precision == report.precision);
    CHECK(back.f1 == report.f1);
    CHECK(back.positive_class == report.positive_class);
}

TEST_CASE("confusion csv carries class names on both axes") {
    ConfusionMatrix m;
    m.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    m.counts = {{3, 1}, {0, 2}};
    const auto text = confusion_to_csv(m);
    CHECK(text == "class,Normal,Cancer\nNormal,3,1\nCancer,0,2\n");
}

}  // TEST_SUITE
