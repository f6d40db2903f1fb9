#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hema/dataset.hpp"
#include "hema/image.hpp"
#include "hema/rng.hpp"

namespace hema {

enum class AugKind { hflip, vflip, rotate, translate, scale, mosaic, random_erase, randaugment };

enum class EraseFill { noise, black, white };

// One transform description. Parameters are fixed at build time; the only
// stochastic part of a geometric spec is whether it fires (probability),
// while random_erase, mosaic and randaugment draw from the per-sample rng.
struct AugmentationSpec {
    AugKind kind = AugKind::hflip;
    double probability = 1.0;

    double degrees = 0.0;        // rotate
    double translate_x = 0.0;    // translate, fraction of width
    double translate_y = 0.0;    // translate, fraction of height
    double scale_factor = 1.0;   // scale

    double erase_area_min = 0.02;  // random_erase
    double erase_area_max = 0.10;
    double erase_aspect_min = 0.5;
    double erase_aspect_max = 2.0;
    EraseFill erase_fill = EraseFill::noise;

    int ra_ops = 2;       // randaugment
    int ra_magnitude = 9;

    double mosaic_center_jitter = 0.2;

    void validate() const;
};

struct AugmentationPipeline {
    std::vector<AugmentationSpec> specs;
    std::uint64_t seed = 0;
};

// Exact-parameter geometric transforms; dimensions are preserved and
// exposed borders fill with black. Throws for non-geometric kinds.
Image geometric_transform(const Image& image, const AugmentationSpec& spec, Rng& rng);

// Occludes one axis-aligned rectangle whose area fraction falls in the
// configured range.
Image random_erase(const Image& image, const AugmentationSpec& spec, Rng& rng);

// Composes four same-class images into the quadrants of a target-size
// canvas around a jittered center. Mixed labels are an error.
std::pair<Image, ClassLabel> mosaic(const std::array<Image, 4>& images,
                                    const std::array<ClassLabel, 4>& labels,
                                    int target_width, int target_height,
                                    double center_jitter, Rng& rng);

// n ops sampled uniformly from the fixed policy list, each applied at
// magnitude m (0..30, where 0 is the identity for every op).
Image rand_augment(const Image& image, int n, int m, Rng& rng);

// Parses the augmentation config section: {"seed": ..., "specs": [...]}.
// Unknown kinds and malformed params are errors naming the entry.
AugmentationPipeline build_pipeline(const nlohmann::json& section,
                                    std::uint64_t default_seed = 0);

// Supplies three extra same-class images when a mosaic spec fires.
using MosaicSource = std::function<std::array<Image, 3>(ClassLabel, Rng&)>;

// Applies the pipeline with an rng derived from (pipeline.seed,
// instance_key); output is a pure function of those plus the input image.
Image apply_pipeline(const AugmentationPipeline& pipeline, const Image& image,
                     ClassLabel label, std::string_view instance_key,
                     const MosaicSource* mosaic_source = nullptr);

const char* to_string(AugKind kind);
AugKind aug_kind_from_string(const std::string& s);
const char* to_string(EraseFill fill);
EraseFill erase_fill_from_string(const std::string& s);

}  // namespace hema
