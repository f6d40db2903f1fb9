#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hema/augmentation.hpp"
#include "hema/dataset.hpp"
#include "hema/segmentation.hpp"
#include "hema/training.hpp"

namespace hema {

struct DatasetEntry {
    DatasetKind kind = DatasetKind::ALL_IMAGE;
    std::filesystem::path root;
    std::map<std::string, std::size_t> expected_counts;  // empty = no validation
};

struct PipelineConfig {
    std::uint64_t seed = 42;
    std::filesystem::path out_dir;

    std::vector<DatasetEntry> datasets;
    std::map<ClassLabel, ClassLabel> class_map;
    SplitRatios split_ratios;
    bool verify_decode = false;

    SegmentationConfig segmentation;
    bool write_masks = false;

    nlohmann::json augmentation_section;  // parsed lazily against the run seed

    std::string backend_name = "reference_cnn";
    TrainConfig training;

    std::filesystem::path comparison_rows_file;
    std::string evaluate_split_name = "test";
    ClassLabel positive_class = ClassLabel::Cancer;

    std::string config_digest;  // fnv-1a of the raw config file bytes

    AugmentationPipeline augmentation() const {
        return build_pipeline(augmentation_section, seed);
    }
};

// Relative paths in the file resolve against the config file's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& file);

// The paper's merge: Benign and IDB1-Normal become Normal; Early, Pre, Pro
// and IDB1-Cancer become Cancer.
std::map<ClassLabel, ClassLabel> default_class_map();

nlohmann::json segmentation_to_json(const SegmentationConfig& config);
SegmentationConfig segmentation_from_json(const nlohmann::json& j);

}  // namespace hema
