#pragma once

#include <string>
#include <vector>

#include "hema/color.hpp"
#include "hema/image.hpp"
#include "hema/mask.hpp"

namespace hema {

// Inclusive HSV interval. Hue is in degrees and may wrap around 0
// (hue_min > hue_max means the interval crosses 360/0).
struct HsvRange {
    double hue_min = 110.0;
    double hue_max = 170.0;
    double sat_min = 0.25;
    double sat_max = 1.0;
    double val_min = 0.20;
    double val_max = 1.0;

    void validate() const;
    bool contains(const Hsv& hsv) const;
};

enum class MorphOp { erode, dilate, open, close };

struct MorphStep {
    MorphOp op = MorphOp::open;
    int kernel_radius = 1;  // square structuring element, side 2r+1
};

enum class BackgroundPolicy { black, white, mean_color };

struct SegmentationConfig {
    HsvRange range;
    std::vector<MorphStep> morphology = {{MorphOp::open, 1}, {MorphOp::close, 2}};
    double min_foreground_fraction = 0.01;
    BackgroundPolicy background_policy = BackgroundPolicy::black;

    void validate() const;
};

struct SegmentedImage {
    Image image;
    BinaryMask mask;
    bool fallback_used = false;
    double foreground_fraction = 0.0;
};

// Bit set iff the pixel's HSV triple lies inside the range.
BinaryMask build_mask(const Image& image, const HsvRange& range);

// Out-of-bounds neighborhoods count as foreground for erosion and as
// background for dilation; this keeps erode/dilate exact duals under
// mask complement.
BinaryMask erode(const BinaryMask& mask, int kernel_radius);
BinaryMask dilate(const BinaryMask& mask, int kernel_radius);

// Steps applied in order; empty list is the identity.
BinaryMask refine_mask(BinaryMask mask, const std::vector<MorphStep>& morphology);

// Foreground pixels copied verbatim, background replaced per policy.
// Throws std::invalid_argument on dimension mismatch.
Image apply_mask(const Image& image, const BinaryMask& mask, BackgroundPolicy policy);

// build_mask -> refine_mask -> apply_mask, falling back to the unmodified
// input when the refined foreground fraction is below the configured
// minimum.
SegmentedImage segment_sample(const Image& image, const SegmentationConfig& config);

const char* to_string(MorphOp op);
MorphOp morph_op_from_string(const std::string& s);
const char* to_string(BackgroundPolicy policy);
BackgroundPolicy background_policy_from_string(const std::string& s);

}  // namespace hema
