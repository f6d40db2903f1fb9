#include "hema/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hema/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hema {

std::map<ClassLabel, ClassLabel> default_class_map() {
    return {
        {ClassLabel::Benign, ClassLabel::Normal},
        {ClassLabel::Normal, ClassLabel::Normal},
        {ClassLabel::Early, ClassLabel::Cancer},
        {ClassLabel::Pre, ClassLabel::Cancer},
        {ClassLabel::Pro, ClassLabel::Cancer},
        {ClassLabel::Cancer, ClassLabel::Cancer},
    };
}

json segmentation_to_json(const SegmentationConfig& config) {
    json j;
    j["hue_min"] = config.range.hue_min;
    j["hue_max"] = config.range.hue_max;
    j["sat_min"] = config.range.sat_min;
    j["sat_max"] = config.range.sat_max;
    j["val_min"] = config.range.val_min;
    j["val_max"] = config.range.val_max;
    j["morphology"] = json::array();
    for (const auto& step : config.morphology) {
        j["morphology"].push_back({{"op", to_string(step.op)}, {"radius", step.kernel_radius}});
    }
    j["min_foreground_fraction"] = config.min_foreground_fraction;
    j["background_policy"] = to_string(config.background_policy);
    return j;
}

SegmentationConfig segmentation_from_json(const json& j) {
    SegmentationConfig config;
    config.range.hue_min = j.value("hue_min", config.range.hue_min);
    config.range.hue_max = j.value("hue_max", config.range.hue_max);
    config.range.sat_min = j.value("sat_min", config.range.sat_min);
    config.range.sat_max = j.value("sat_max", config.range.sat_max);
    config.range.val_min = j.value("val_min", config.range.val_min);
    config.range.val_max = j.value("val_max", config.range.val_max);
    if (j.contains("morphology")) {
        config.morphology.clear();
        for (const auto& js : j.at("morphology")) {
            MorphStep step;
            step.op = morph_op_from_string(js.at("op").get<std::string>());
            step.kernel_radius = js.value("radius", 1);
            config.morphology.push_back(step);
        }
    }
    config.min_foreground_fraction =
        j.value("min_foreground_fraction", config.min_foreground_fraction);
    config.background_policy =
        background_policy_from_string(j.value("background_policy", "black"));
    config.validate();
    return config;
}

PipelineConfig load_pipeline_config(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file: " + file.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string raw = buffer.str();

    json j;
    try {
        j = json::parse(raw);
    } catch (const std::exception& e) {
        throw std::runtime_error("config parse error in " + file.string() + ": " + e.what());
    }

    const fs::path base = fs::absolute(file).parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path path(p);
        return path.is_absolute() ? path : (base / path).lexically_normal();
    };

    PipelineConfig config;
    config.config_digest = hex64(fnv1a64(raw));
    config.seed = j.value("seed", static_cast<std::uint64_t>(42));
    if (!j.contains("out_dir")) {
        throw std::runtime_error("config is missing out_dir");
    }
    config.out_dir = resolve(j.at("out_dir").get<std::string>());

    for (const auto& jd : j.value("datasets", json::array())) {
        DatasetEntry entry;
        entry.kind = dataset_kind_from_string(jd.at("kind").get<std::string>());
        entry.root = resolve(jd.at("root").get<std::string>());
        if (jd.contains("expected_counts")) {
            const auto& je = jd.at("expected_counts");
            if (je.is_string()) {
                std::ifstream ein(resolve(je.get<std::string>()));
                if (!ein) {
                    throw std::runtime_error("cannot read expected counts file: " +
                                             je.get<std::string>());
                }
                json parsed;
                ein >> parsed;
                entry.expected_counts = parsed.get<std::map<std::string, std::size_t>>();
            } else {
                entry.expected_counts = je.get<std::map<std::string, std::size_t>>();
            }
        }
        config.datasets.push_back(std::move(entry));
    }
    if (config.datasets.empty()) {
        throw std::runtime_error("config needs at least one dataset entry");
    }

    if (j.contains("class_map")) {
        for (const auto& [from, to] : j.at("class_map").items()) {
            config.class_map[class_label_from_string(from)] =
                class_label_from_string(to.get<std::string>());
        }
    } else {
        config.class_map = default_class_map();
    }

    if (j.contains("split")) {
        const auto& js = j.at("split");
        const auto ratios = js.value("ratios", std::vector<double>{0.7, 0.15, 0.15});
        if (ratios.size() != 3) {
            throw std::runtime_error("split.ratios must list train, val and test fractions");
        }
        config.split_ratios = {ratios[0], ratios[1], ratios[2]};
    }
    config.verify_decode = j.value("verify_decode", false);

    if (j.contains("segmentation")) {
        config.segmentation = segmentation_from_json(j.at("segmentation"));
        config.write_masks = j.at("segmentation").value("write_masks", false);
    }

    config.augmentation_section = j.value("augmentation", json::object());

    if (j.contains("training")) {
        const auto& jt = j.at("training");
        config.backend_name = jt.value("backend", config.backend_name);
        config.training.epochs = jt.value("epochs", config.training.epochs);
        config.training.optimizer_name = jt.value("optimizer", config.training.optimizer_name);
        config.training.learning_rate = jt.value("learning_rate", config.training.learning_rate);
        config.training.batch_size = jt.value("batch_size", config.training.batch_size);
        config.training.freeze_backbone_epochs =
            jt.value("freeze_backbone_epochs", config.training.freeze_backbone_epochs);
        config.training.input_resolution =
            jt.value("input_resolution", config.training.input_resolution);
        config.training.weight_decay = jt.value("weight_decay", config.training.weight_decay);
        config.training.deterministic = jt.value("deterministic", true);
        config.training.seed = jt.value("seed", config.seed);
    } else {
        config.training.seed = config.seed;
    }
    config.training.validate();

    if (j.contains("report")) {
        const auto& jr = j.at("report");
        if (jr.contains("comparison_rows")) {
            config.comparison_rows_file = resolve(jr.at("comparison_rows").get<std::string>());
        }
    }

    if (j.contains("evaluate")) {
        const auto& je = j.at("evaluate");
        config.evaluate_split_name = je.value("split", config.evaluate_split_name);
        if (je.contains("positive_class")) {
            config.positive_class =
                class_label_from_string(je.at("positive_class").get<std::string>());
        }
    }
    split_from_string(config.evaluate_split_name);  // validate early

    // the augmentation section must parse even if train is never run
    (void)config.augmentation();
    return config;
}

}  // namespace hema
