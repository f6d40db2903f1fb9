#include "hema/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hema/csv.hpp"
#include "hema/image_io.hpp"
#include "hema/rng.hpp"
#include "hema/version.hpp"

using nlohmann::json;

namespace hema {

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(learning_rate > 0.0) && learning_rate != 0.0) {
        throw std::invalid_argument("learning_rate must be >= 0");
    }
    if (learning_rate < 0.0) throw std::invalid_argument("learning_rate must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (freeze_backbone_epochs < 0 || freeze_backbone_epochs > epochs) {
        throw std::invalid_argument("freeze_backbone_epochs must be in [0, epochs]");
    }
    if (input_resolution < 4) throw std::invalid_argument("input_resolution must be >= 4");
    if (optimizer_name != "adamw" && optimizer_name != "sgd") {
        throw std::invalid_argument("unknown optimizer: " + optimizer_name);
    }
}

Optimizer::Optimizer(std::string name, const TrainConfig& config)
    : name_(std::move(name)), config_(config) {}

void Optimizer::step(const std::vector<ParameterGroup>& groups, bool backbone_frozen) {
    if (m_.size() < groups.size()) {
        m_.resize(groups.size());
        v_.resize(groups.size());
    }
    ++t_;
    const double lr = config_.learning_rate;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& group = groups[g];
        if (backbone_frozen && group.tag == "backbone") continue;
        auto& values = *group.values;
        const auto& grads = *group.grads;
        if (name_ == "sgd") {
            for (std::size_t i = 0; i < values.size(); ++i) {
                values[i] -= lr * (grads[i] + config_.weight_decay * values[i]);
            }
            continue;
        }
        // adamw
        if (m_[g].size() != values.size()) {
            m_[g].assign(values.size(), 0.0);
            v_[g].assign(values.size(), 0.0);
        }
        const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < values.size(); ++i) {
            m_[g][i] = config_.beta1 * m_[g][i] + (1.0 - config_.beta1) * grads[i];
            v_[g][i] = config_.beta2 * v_[g][i] + (1.0 - config_.beta2) * grads[i] * grads[i];
            const double m_hat = m_[g][i] / bc1;
            const double v_hat = v_[g][i] / bc2;
            values[i] -= lr * (m_hat / (std::sqrt(v_hat) + config_.epsilon) +
                               config_.weight_decay * values[i]);
        }
    }
}

namespace {

std::vector<ClassLabel> mapped_class_order(const std::vector<SampleRecord>& records) {
    bool has_normal = false;
    bool has_cancer = false;
    for (const auto& record : records) {
        if (!record.mapped_class) {
            throw std::invalid_argument("record without mapped_class: " + record.sample_id);
        }
        if (*record.mapped_class == ClassLabel::Normal) has_normal = true;
        if (*record.mapped_class == ClassLabel::Cancer) has_cancer = true;
    }
    std::vector<ClassLabel> order;
    if (has_normal) order.push_back(ClassLabel::Normal);
    if (has_cancer) order.push_back(ClassLabel::Cancer);
    return order;
}

int label_index(const std::vector<ClassLabel>& order, ClassLabel label) {
    const auto it = std::find(order.begin(), order.end(), label);
    if (it == order.end()) {
        throw std::runtime_error(std::string("label not in class order: ") + to_string(label));
    }
    return static_cast<int>(it - order.begin());
}

Image load_resized(const SampleRecord& record, int resolution) {
    Image img;
    try {
        img = load_image(record.path);
    } catch (const std::exception& e) {
        throw std::runtime_error("sample " + record.sample_id + ": " + e.what());
    }
    return resize_nearest(img, resolution, resolution);
}

std::size_t argmax_lowest(const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

}  // namespace

std::pair<TrainedModel, TrainingHistory> fine_tune(std::shared_ptr<ClassifierBackend> backend,
                                                   const std::vector<SampleRecord>& train,
                                                   const std::vector<SampleRecord>& val,
                                                   const TrainConfig& config,
                                                   const AugmentationPipeline& pipeline,
                                                   const std::string& manifest_digest) {
    config.validate();
    if (train.empty()) throw std::invalid_argument("train split is empty");
    if (val.empty()) throw std::invalid_argument("val split is empty");

    const auto class_order = mapped_class_order(train);
    if (class_order.size() < 2) {
        throw std::invalid_argument("train split must contain both classes");
    }

    const int resolution = backend->input_resolution();

    // decode once; the corpus of a run fits in memory at training resolution
    std::vector<Image> train_images, val_images;
    std::vector<int> train_labels, val_labels;
    train_images.reserve(train.size());
    for (const auto& record : train) {
        train_images.push_back(load_resized(record, resolution));
        train_labels.push_back(label_index(class_order, *record.mapped_class));
    }
    val_images.reserve(val.size());
    for (const auto& record : val) {
        val_images.push_back(load_resized(record, resolution));
        val_labels.push_back(label_index(class_order, *record.mapped_class));
    }

    // same-class pool for mosaic quadrants, drawn from unaugmented train images
    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < train_labels.size(); ++i) {
        by_label[train_labels[i]].push_back(i);
    }
    MosaicSource mosaic_source = [&](ClassLabel label, Rng& rng) -> std::array<Image, 3> {
        const auto& pool = by_label.at(label_index(class_order, label));
        std::array<Image, 3> out;
        for (auto& img : out) {
            img = train_images[pool[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))]];
        }
        return out;
    };

    Optimizer optimizer(config.optimizer_name, config);
    TrainingHistory history;
    history.epochs.reserve(static_cast<std::size_t>(config.epochs));

    TrainedModel model;
    model.backend_name = backend->name();
    model.tool_version = tool_id();
    model.class_order = class_order;
    model.config = config;
    model.manifest_digest = manifest_digest;
    model.backend = backend;

    double best_val_accuracy = -1.0;
    int best_epoch = 0;
    std::vector<std::vector<double>> best_values;

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        const bool frozen = epoch <= config.freeze_backbone_epochs;

        Rng shuffle_rng(derive_seed(config.seed, "epoch/" + std::to_string(epoch)));
        deterministic_shuffle(order, shuffle_rng);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::size_t seen = 0;
        std::vector<Image> batch_storage;
        std::vector<const Image*> batch;
        std::vector<int> labels;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch_storage.clear();
            batch.clear();
            labels.clear();
            for (std::size_t i = start; i < end; ++i) {
                const auto idx = order[i];
                const auto& record = train[idx];
                const std::string key = record.sample_id + "#epoch=" + std::to_string(epoch);
                batch_storage.push_back(apply_pipeline(pipeline, train_images[idx],
                                                       *record.mapped_class, key, &mosaic_source));
                labels.push_back(train_labels[idx]);
            }
            for (const auto& img : batch_storage) batch.push_back(&img);

            try {
                backend->zero_grad();
                std::size_t batch_correct = 0;
                const double loss = backend->forward_backward(batch, labels, &batch_correct);
                optimizer.step(backend->parameters(), frozen);
                loss_sum += loss * static_cast<double>(batch.size());
                correct += batch_correct;
                seen += batch.size();
            } catch (const std::exception& e) {
                throw std::runtime_error("training failed in epoch " + std::to_string(epoch) +
                                         ": " + e.what());
            }
        }

        // clean validation pass
        double val_loss_sum = 0.0;
        std::size_t val_correct = 0;
        for (std::size_t i = 0; i < val_images.size(); ++i) {
            const auto scores = backend->predict(val_images[i]);
            const std::vector<const Image*> one = {&val_images[i]};
            val_loss_sum += backend->batch_loss(one, {val_labels[i]});
            if (static_cast<int>(argmax_lowest(scores)) == val_labels[i]) ++val_correct;
        }

        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = loss_sum / static_cast<double>(seen);
        record.val_loss = val_loss_sum / static_cast<double>(val_images.size());
        record.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
        record.val_accuracy =
            static_cast<double>(val_correct) / static_cast<double>(val_images.size());
        record.wall_time_s =
            config.deterministic
                ? 0.0
                : std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        history.epochs.push_back(record);

        if (record.val_accuracy > best_val_accuracy) {
            best_val_accuracy = record.val_accuracy;
            best_epoch = epoch;
            best_values.clear();
            for (const auto& group : backend->parameters()) {
                best_values.push_back(*group.values);
            }
        }
    }

    // restore the best-validation-accuracy checkpoint
    auto groups = backend->parameters();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        *groups[g].values = best_values[g];
    }
    model.best_epoch = best_epoch;
    model.best_val_accuracy = best_val_accuracy;
    return {std::move(model), std::move(history)};
}

std::vector<double> predict(const TrainedModel& model, const Image& image) {
    if (image.empty()) throw std::invalid_argument("predict: empty image");
    const int r = model.backend->input_resolution();
    return model.backend->predict(resize_nearest(image, r, r));
}

PredictionSet evaluate_split(const TrainedModel& model, const std::vector<SampleRecord>& records) {
    if (records.empty()) throw std::invalid_argument("evaluate_split: empty split");
    PredictionSet out;
    out.class_order = model.class_order;
    out.rows.reserve(records.size());
    for (const auto& record : records) {
        if (!record.mapped_class) {
            throw std::runtime_error("record without mapped_class: " + record.sample_id);
        }
        Image img;
        try {
            img = load_image(record.path);
        } catch (const std::exception& e) {
            throw std::runtime_error("sample " + record.sample_id + ": " + e.what());
        }
        PredictionRow row;
        row.sample_id = record.sample_id;
        row.true_label = *record.mapped_class;
        row.scores = predict(model, img);
        row.predicted_label = model.class_order[argmax_lowest(row.scores)];
        out.rows.push_back(std::move(row));
    }
    return out;
}

namespace {

json train_config_to_json(const TrainConfig& config) {
    json j;
    j["epochs"] = config.epochs;
    j["optimizer"] = config.optimizer_name;
    j["learning_rate"] = config.learning_rate;
    j["batch_size"] = config.batch_size;
    j["freeze_backbone_epochs"] = config.freeze_backbone_epochs;
    j["seed"] = config.seed;
    j["input_resolution"] = config.input_resolution;
    j["beta1"] = config.beta1;
    j["beta2"] = config.beta2;
    j["epsilon"] = config.epsilon;
    j["weight_decay"] = config.weight_decay;
    j["deterministic"] = config.deterministic;
    return j;
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig config;
    config.epochs = j.value("epochs", config.epochs);
    config.optimizer_name = j.value("optimizer", config.optimizer_name);
    config.learning_rate = j.value("learning_rate", config.learning_rate);
    config.batch_size = j.value("batch_size", config.batch_size);
    config.freeze_backbone_epochs = j.value("freeze_backbone_epochs", config.freeze_backbone_epochs);
    config.seed = j.value("seed", config.seed);
    config.input_resolution = j.value("input_resolution", config.input_resolution);
    config.beta1 = j.value("beta1", config.beta1);
    config.beta2 = j.value("beta2", config.beta2);
    config.epsilon = j.value("epsilon", config.epsilon);
    config.weight_decay = j.value("weight_decay", config.weight_decay);
    config.deterministic = j.value("deterministic", config.deterministic);
    return config;
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json j;
    j["backend"] = model.backend_name;
    j["tool_version"] = model.tool_version;
    j["class_order"] = json::array();
    for (auto label : model.class_order) j["class_order"].push_back(to_string(label));
    j["train_config"] = train_config_to_json(model.config);
    j["manifest_digest"] = model.manifest_digest;
    j["best_epoch"] = model.best_epoch;
    j["best_val_accuracy"] = model.best_val_accuracy;
    const auto file = dir / "model.json";
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write model metadata: " + file.string());
    out << j.dump(2) << "\n";
    model.backend->save_weights(dir);
}

TrainedModel load_model(const std::filesystem::path& dir) {
    const auto file = dir / "model.json";
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read model metadata: " + file.string());
    json j;
    in >> j;

    TrainedModel model;
    model.backend_name = j.at("backend").get<std::string>();
    model.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& name : j.at("class_order")) {
        model.class_order.push_back(class_label_from_string(name.get<std::string>()));
    }
    model.config = train_config_from_json(j.at("train_config"));
    model.manifest_digest = j.at("manifest_digest").get<std::string>();
    model.best_epoch = j.at("best_epoch").get<int>();
    model.best_val_accuracy = j.at("best_val_accuracy").get<double>();

    BackendOptions options;
    options.num_classes = static_cast<int>(model.class_order.size());
    options.input_resolution = model.config.input_resolution;
    options.seed = model.config.seed;
    model.backend = load_backend(model.backend_name, options);
    model.backend->load_weights(dir);
    return model;
}

void save_history_csv(const TrainingHistory& history, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write history: " + file.string());
    out << "epoch,train_loss,val_loss,train_accuracy,val_accuracy,wall_time_s\n";
    for (const auto& r : history.epochs) {
        out << r.epoch << ',' << fmt_double(r.train_loss) << ',' << fmt_double(r.val_loss) << ','
            << fmt_double(r.train_accuracy) << ',' << fmt_double(r.val_accuracy) << ','
            << fmt_double(r.wall_time_s) << "\n";
    }
}

TrainingHistory load_history_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read history: " + file.string());
    std::string line;
    if (!std::getline(in, line) ||
        line != "epoch,train_loss,val_loss,train_accuracy,val_accuracy,wall_time_s") {
        throw std::runtime_error("bad history header in " + file.string());
    }
    TrainingHistory history;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 6) throw std::runtime_error("bad history row: " + line);
        EpochRecord r;
        r.epoch = std::stoi(cells[0]);
        r.train_loss = parse_double(cells[1]);
        r.val_loss = parse_double(cells[2]);
        r.train_accuracy = parse_double(cells[3]);
        r.val_accuracy = parse_double(cells[4]);
        r.wall_time_s = parse_double(cells[5]);
        history.epochs.push_back(r);
    }
    return history;
}

void save_predictions_csv(const PredictionSet& predictions, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write predictions: " + file.string());
    out << "sample_id,true,predicted";
    for (auto label : predictions.class_order) out << ",score_" << to_string(label);
    out << "\n";
    for (const auto& row : predictions.rows) {
        out << csv_escape(row.sample_id) << ',' << to_string(row.true_label) << ','
            << to_string(row.predicted_label);
        for (double score : row.scores) out << ',' << fmt_double(score);
        out << "\n";
    }
}

PredictionSet load_predictions_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read predictions: " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty predictions file: " + file.string());
    const auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "sample_id" || header[1] != "true" ||
        header[2] != "predicted") {
        throw std::runtime_error("bad predictions header in " + file.string());
    }
    PredictionSet out;
    for (std::size_t i = 3; i < header.size(); ++i) {
        const std::string prefix = "score_";
        if (header[i].rfind(prefix, 0) != 0) {
            throw std::runtime_error("bad score column: " + header[i]);
        }
        out.class_order.push_back(class_label_from_string(header[i].substr(prefix.size())));
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 3 + out.class_order.size()) {
            throw std::runtime_error("bad predictions row: " + line);
        }
        PredictionRow row;
        row.sample_id = cells[0];
        row.true_label = class_label_from_string(cells[1]);
        row.predicted_label = class_label_from_string(cells[2]);
        for (std::size_t i = 3; i < cells.size(); ++i) {
            row.scores.push_back(parse_double(cells[i]));
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace hema
