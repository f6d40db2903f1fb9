#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hema/augmentation.hpp"
#include "hema/backend.hpp"
#include "hema/dataset.hpp"
#include "hema/metrics.hpp"

namespace hema {

struct TrainConfig {
    int epochs = 100;
    std::string optimizer_name = "adamw";
    double learning_rate = 0.000714;
    int batch_size = 32;
    int freeze_backbone_epochs = 0;
    std::uint64_t seed = 42;
    int input_resolution = 224;

    // AdamW parameters; the weight decay is decoupled.
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;

    // Single-threaded data order; epoch wall times are recorded as 0 so
    // histories from equal-seed runs match byte for byte.
    bool deterministic = true;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    double wall_time_s = 0.0;

    bool operator==(const EpochRecord&) const = default;
};

struct TrainingHistory {
    std::vector<EpochRecord> epochs;
    bool operator==(const TrainingHistory&) const = default;
};

struct TrainedModel {
    std::string backend_name;
    std::string tool_version;
    std::vector<ClassLabel> class_order;
    TrainConfig config;
    std::string manifest_digest;
    int best_epoch = 0;
    double best_val_accuracy = 0.0;
    std::shared_ptr<ClassifierBackend> backend;  // holds the best-epoch weights
};

// Decoupled-weight-decay Adam over tagged parameter groups; "sgd" is the
// plain alternative. Backbone groups can be skipped while frozen.
class Optimizer {
public:
    Optimizer(std::string name, const TrainConfig& config);
    void step(const std::vector<ParameterGroup>& groups, bool backbone_frozen);

private:
    std::string name_;
    TrainConfig config_;
    long long t_ = 0;
    std::vector<std::vector<double>> m_, v_;  // per group, lazily sized
};

// Trains on `train`, evaluates on `val` each epoch, and keeps the weights
// of the best validation accuracy (earliest epoch wins ties).
// Augmentation applies to the train split only.
std::pair<TrainedModel, TrainingHistory> fine_tune(std::shared_ptr<ClassifierBackend> backend,
                                                   const std::vector<SampleRecord>& train,
                                                   const std::vector<SampleRecord>& val,
                                                   const TrainConfig& config,
                                                   const AugmentationPipeline& pipeline,
                                                   const std::string& manifest_digest = "");

// Normalized scores in the model's class order.
std::vector<double> predict(const TrainedModel& model, const Image& image);

// One row per record, in the given order; argmax ties break to the lowest
// class index.
PredictionSet evaluate_split(const TrainedModel& model, const std::vector<SampleRecord>& records);

void save_model(const TrainedModel& model, const std::filesystem::path& dir);
TrainedModel load_model(const std::filesystem::path& dir);

// header: epoch,train_loss,val_loss,train_accuracy,val_accuracy,wall_time_s
void save_history_csv(const TrainingHistory& history, const std::filesystem::path& file);
TrainingHistory load_history_csv(const std::filesystem::path& file);

// header: sample_id,true,predicted,score_<class>...
void save_predictions_csv(const PredictionSet& predictions, const std::filesystem::path& file);
PredictionSet load_predictions_csv(const std::filesystem::path& file);

}  // namespace hema
