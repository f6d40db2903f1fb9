#include <doctest.h>

#include <cmath>

#include "hema/config.hpp"
#include "hema/fixtures.hpp"
#include "hema/reference_cnn.hpp"
#include "hema/training.hpp"
#include "test_util.hpp"

using namespace hema;
using testutil::TempDir;

namespace {

// Ingests the 8-image uniform-color fixture and returns mapped records.
std::vector<SampleRecord> overfit_records(const std::filesystem::path& dir) {
    fixtures::write_overfit_fixture(dir, 4, 32);
    auto manifest = merge_manifests(ingest_dataset(dir, DatasetKind::ALL_IDB1),
                                    empty_manifest(), default_class_map());
    return manifest.records;
}

TrainConfig smoke_config() {
    TrainConfig config;
    config.epochs = 150;
    config.optimizer_name = "adamw";
    config.learning_rate = 0.01;
    config.batch_size = 8;
    config.input_resolution = 32;
    config.seed = 7;
    return config;
}

std::shared_ptr<ClassifierBackend> smoke_backend(std::uint64_t seed = 7, int resolution = 32) {
    BackendOptions options;
    options.num_classes = 2;
    options.input_resolution = resolution;
    options.seed = seed;
    return load_backend("reference_cnn", options);
}

Image noise_image(Rng& rng, int size) {
    Image img(size, size);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    return img;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("the reference backend reports its head shape") {
    const auto backend = smoke_backend();
    CHECK(backend->name() == "reference_cnn");
    CHECK(backend->num_classes() == 2);
    CHECK(backend->input_resolution() == 32);
}

TEST_CASE("unknown backends are rejected with the registry contents") {
    BackendOptions options;
    CHECK_THROWS_WITH_AS(load_backend("resnet999", options), doctest::Contains("resnet999"),
                         std::runtime_error);
}

TEST_CASE("detector adapters fail loudly when their runtime is absent") {
    BackendOptions options;
    CHECK_THROWS_AS(load_backend("yolov8s", options), BackendUnavailableError);
    CHECK_THROWS_AS(load_backend("yolov11s", options), BackendUnavailableError);
}

TEST_CASE("prediction scores are normalized and repeatable") {
    const auto backend = smoke_backend();
    Rng rng(3);
    const auto img = noise_image(rng, 32);
    const auto a = backend->predict(img);
    const auto b = backend->predict(img);
    REQUIRE(a.size() == 2);
    CHECK(a == b);
    CHECK(std::abs(a[0] + a[1] - 1.0) <= 1e-6);
    for (double s : a) CHECK(std::isfinite(s));
}

TEST_CASE("two backends seeded alike predict alike") {
    const auto a = smoke_backend(7);
    const auto b = smoke_backend(7);
    const auto c = smoke_backend(8);
    Rng rng(4);
    const auto img = noise_image(rng, 32);
    CHECK(a->predict(img) == b->predict(img));
    CHECK(a->predict(img) != c->predict(img));
}

TEST_CASE("analytic gradients match central finite differences") {
    const auto backend = smoke_backend(11, 16);
    Rng rng(13);
    std::vector<Image> images;
    std::vector<const Image*> batch;
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) {
        images.push_back(noise_image(rng, 16));
        labels.push_back(i % 2);
    }
    for (const auto& img : images) batch.push_back(&img);

    backend->zero_grad();
    backend->forward_backward(batch, labels);
    auto groups = backend->parameters();

    const double h = 1e-5;
    int checked = 0;
    for (int trial = 0; trial < 12; ++trial) {
        auto& group = groups[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(groups.size()) - 1))];
        auto& values = *group.values;
        const auto index = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(values.size()) - 1));
        const double analytic = (*group.grads)[index];

        const double saved = values[index];
        values[index] = saved + h;
        const double up = backend->batch_loss(batch, labels);
        values[index] = saved - h;
        const double down = backend->batch_loss(batch, labels);
        values[index] = saved;

        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-6});
        CHECK(std::abs(analytic - fd) / denom <= 1e-3);
        ++checked;
    }
    CHECK(checked == 12);
}

TEST_CASE("the reference cnn memorizes the eight-image fixture") {
    TempDir tmp("overfit");
    const auto records = overfit_records(tmp.path());
    REQUIRE(records.size() == 8);

    auto backend = smoke_backend();
    const auto [model, history] =
        fine_tune(backend, records, records, smoke_config(), AugmentationPipeline{});

    REQUIRE(history.epochs.size() == 150);
    CHECK(history.epochs.back().train_accuracy == 1.0);
    CHECK(model.best_val_accuracy == 1.0);

    // the trained model labels its own training set perfectly
    const auto predictions = evaluate_split(model, records);
    REQUIRE(predictions.rows.size() == records.size());
    for (const auto& row : predictions.rows) {
        CHECK(row.predicted_label == row.true_label);
    }
}

TEST_CASE("training twice with one seed gives identical histories") {
    TempDir tmp("determinism");
    const auto records = overfit_records(tmp.path());
    auto config = smoke_config();
    config.epochs = 6;

    const auto run = [&]() {
        auto backend = smoke_backend();
        return fine_tune(backend, records, records, config, AugmentationPipeline{}).second;
    };
    const auto a = run();
    const auto b = run();
    CHECK(a == b);
}

TEST_CASE("epochs are numbered 1..n without gaps") {
    TempDir tmp("epochs");
    const auto records = overfit_records(tmp.path());
    auto config = smoke_config();
    config.epochs = 5;
    auto backend = smoke_backend();
    const auto history =
        fine_tune(backend, records, records, config, AugmentationPipeline{}).second;
    REQUIRE(history.epochs.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(history.epochs[static_cast<std::size_t>(i)].epoch == i + 1);
        CHECK(std::isfinite(history.epochs[static_cast<std::size_t>(i)].train_loss));
        CHECK(history.epochs[static_cast<std::size_t>(i)].train_loss >= 0.0);
    }
}

TEST_CASE("a zero learning rate leaves every parameter digest unchanged") {
    TempDir tmp("lr0");
    const auto records = overfit_records(tmp.path());
    auto config = smoke_config();
    config.epochs = 3;
    config.learning_rate = 0.0;

    auto backend = smoke_backend();
    const auto before = parameter_digest(backend->parameters());
    fine_tune(backend, records, records, config, AugmentationPipeline{});
    CHECK(parameter_digest(backend->parameters()) == before);
}

TEST_CASE("frozen epochs keep the backbone fixed while the head moves") {
    TempDir tmp("freeze");
    const auto records = overfit_records(tmp.path());
    auto config = smoke_config();
    config.epochs = 3;
    config.freeze_backbone_epochs = 3;

    auto backend = smoke_backend();
    const auto backbone_before = parameter_digest(backend->parameters(), "backbone");
    const auto head_before = parameter_digest(backend->parameters(), "head");
    fine_tune(backend, records, records, config, AugmentationPipeline{});
    CHECK(parameter_digest(backend->parameters(), "backbone") == backbone_before);
    CHECK(parameter_digest(backend->parameters(), "head") != head_before);

    // without freezing, the backbone moves as well
    auto thawed = smoke_backend();
    config.freeze_backbone_epochs = 0;
    fine_tune(thawed, records, records, config, AugmentationPipeline{});
    CHECK(parameter_digest(thawed->parameters(), "backbone") != backbone_before);
}

TEST_CASE("empty splits are rejected") {
    TempDir tmp("empty_split");
    const auto records = overfit_records(tmp.path());
    auto backend = smoke_backend();
    CHECK_THROWS_AS(fine_tune(backend, {}, records, smoke_config(), AugmentationPipeline{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(fine_tune(backend, records, {}, smoke_config(), AugmentationPipeline{}),
                    std::invalid_argument);
}

TEST_CASE("invalid train configs are rejected") {
    TrainConfig config;
    config.epochs = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = TrainConfig{};
    config.freeze_backbone_epochs = config.epochs + 1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = TrainConfig{};
    config.optimizer_name = "adagrad";
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("the paper-default train config validates") {
    TrainConfig config;  // epochs 100, adamw, lr 0.000714
    CHECK(config.epochs == 100);
    CHECK(config.optimizer_name == "adamw");
    CHECK(config.learning_rate == 0.000714);
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("models round-trip through their directory format") {
    TempDir tmp("model_io");
    const auto records = overfit_records(tmp.path() / "data");
    auto config = smoke_config();
    config.epochs = 4;
    auto backend = smoke_backend();
    const auto [model, history] =
        fine_tune(backend, records, records, config, AugmentationPipeline{}, "digest123");

    save_model(model, tmp.path() / "model");
    const auto loaded = load_model(tmp.path() / "model");
    CHECK(loaded.backend_name == model.backend_name);
    CHECK(loaded.class_order == model.class_order);
    CHECK(loaded.manifest_digest == "digest123");
    CHECK(loaded.best_epoch == model.best_epoch);

    Rng rng(5);
    const auto img = noise_image(rng, 32);
    CHECK(predict(model, img) == predict(loaded, img));
}

TEST_CASE("history csv round-trips bit-exactly") {
    TempDir tmp("history_io");
    TrainingHistory history;
    history.epochs.push_back({1, 0.6931471805599453, 0.7, 0.5, 0.25, 0.0});
    history.epochs.push_back({2, 0.1234567890123456789, 3.0e-5, 1.0, 1.0, 0.0});
    const auto file = tmp.path() / "history.csv";
    save_history_csv(history, file);
    CHECK(load_history_csv(file) == history);

    // writing again produces the same bytes
    const auto bytes = testutil::read_file(file);
    save_history_csv(load_history_csv(file), file);
    CHECK(testutil::read_file(file) == bytes);
}

TEST_CASE("prediction csv round-trips bit-exactly") {
    TempDir tmp("pred_io");
    PredictionSet predictions;
    predictions.class_order = {ClassLabel::Normal, ClassLabel::Cancer};
    predictions.rows.push_back(
        {"ALL_IDB1/Normal/img_000.png", ClassLabel::Normal, ClassLabel::Cancer,
         {0.4999999999999999, 0.5000000000000001}});
    predictions.rows.push_back(
        {"a,quoted \"id\"", ClassLabel::Cancer, ClassLabel::Cancer, {0.125, 0.875}});
    const auto file = tmp.path() / "predictions.csv";
    save_predictions_csv(predictions, file);
    const auto loaded = load_predictions_csv(file);
    REQUIRE(loaded.rows.size() == 2);
    CHECK(loaded.class_order == predictions.class_order);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(loaded.rows[i].sample_id == predictions.rows[i].sample_id);
        CHECK(loaded.rows[i].true_label == predictions.rows[i].true_label);
        CHECK(loaded.rows[i].predicted_label == predictions.rows[i].predicted_label);
        CHECK(loaded.rows[i].scores == predictions.rows[i].scores);
    }

    const auto bytes = testutil::read_file(file);
    save_predictions_csv(loaded, file);
    CHECK(testutil::read_file(file) == bytes);
}

TEST_CASE("evaluate_split keeps manifest order and row count") {
    TempDir tmp("eval_order");
    const auto records = overfit_records(tmp.path());
    auto config = smoke_config();
    config.epochs = 2;
    auto backend = smoke_backend();
    const auto model =
        fine_tune(backend, records, records, config, AugmentationPipeline{}).first;
    const auto predictions = evaluate_split(model, records);
    REQUIRE(predictions.rows.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(predictions.rows[i].sample_id == records[i].sample_id);
        CHECK(std::abs(predictions.rows[i].scores[0] + predictions.rows[i].scores[1] - 1.0) <=
              1e-6);
    }
}

}  // TEST_SUITE
