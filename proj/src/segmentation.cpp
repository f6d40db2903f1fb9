#include "hema/segmentation.hpp"

#include <stdexcept>
#include <string>

namespace hema {

void HsvRange::validate() const {
    if (hue_min < 0.0 || hue_min > 360.0 || hue_max < 0.0 || hue_max > 360.0) {
        throw std::invalid_argument("hue bounds must be within [0, 360]");
    }
    if (sat_min < 0.0 || sat_max > 1.0 || sat_min > sat_max) {
        throw std::invalid_argument("saturation bounds must satisfy 0 <= sat_min <= sat_max <= 1");
    }
    if (val_min < 0.0 || val_max > 1.0 || val_min > val_max) {
        throw std::invalid_argument("value bounds must satisfy 0 <= val_min <= val_max <= 1");
    }
}

bool HsvRange::contains(const Hsv& hsv) const {
    if (hsv.s < sat_min || hsv.s > sat_max) return false;
    if (hsv.v < val_min || hsv.v > val_max) return false;
    if (hue_min <= hue_max) {
        return hsv.h >= hue_min && hsv.h <= hue_max;
    }
    // wrap-around interval, e.g. 350 -> 20
    return hsv.h >= hue_min || hsv.h <= hue_max;
}

void SegmentationConfig::validate() const {
    range.validate();
    for (const auto& step : morphology) {
        if (step.kernel_radius < 1) {
            throw std::invalid_argument("morphology kernel_radius must be >= 1");
        }
    }
    if (min_foreground_fraction < 0.0 || min_foreground_fraction > 1.0) {
        throw std::invalid_argument("min_foreground_fraction must be in [0, 1]");
    }
}

BinaryMask build_mask(const Image& image, const HsvRange& range) {
    if (image.empty()) {
        throw std::invalid_argument("build_mask: empty image");
    }
    BinaryMask mask(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            mask.set(x, y, range.contains(rgb_to_hsv(image.at(x, y))));
        }
    }
    return mask;
}

namespace {

BinaryMask morph_window(const BinaryMask& mask, int radius, bool erode_mode) {
    BinaryMask out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            // erosion: AND over the window, missing pixels = 1
            // dilation: OR over the window, missing pixels = 0
            bool acc = erode_mode;
            for (int dy = -radius; dy <= radius && acc == erode_mode; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) {
                        continue;
                    }
                    const bool v = mask.at(nx, ny);
                    if (erode_mode && !v) {
                        acc = false;
                        break;
                    }
                    if (!erode_mode && v) {
                        acc = true;
                        break;
                    }
                }
            }
            out.set(x, y, acc);
        }
    }
    return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int kernel_radius) {
    if (kernel_radius < 1) throw std::invalid_argument("erode: kernel_radius must be >= 1");
    return morph_window(mask, kernel_radius, true);
}

BinaryMask dilate(const BinaryMask& mask, int kernel_radius) {
    if (kernel_radius < 1) throw std::invalid_argument("dilate: kernel_radius must be >= 1");
    return morph_window(mask, kernel_radius, false);
}

BinaryMask refine_mask(BinaryMask mask, const std::vector<MorphStep>& morphology) {
    for (const auto& step : morphology) {
        switch (step.op) {
        case MorphOp::erode:
            mask = erode(mask, step.kernel_radius);
            break;
        case MorphOp::dilate:
            mask = dilate(mask, step.kernel_radius);
            break;
        case MorphOp::open:
            mask = dilate(erode(mask, step.kernel_radius), step.kernel_radius);
            break;
        case MorphOp::close:
            mask = erode(dilate(mask, step.kernel_radius), step.kernel_radius);
            break;
        }
    }
    return mask;
}

Image apply_mask(const Image& image, const BinaryMask& mask, BackgroundPolicy policy) {
    if (image.width != mask.width || image.height != mask.height) {
        throw std::invalid_argument("apply_mask: image and mask dimensions differ");
    }
    Rgb background{0, 0, 0};
    if (policy == BackgroundPolicy::white) {
        background = Rgb{255, 255, 255};
    } else if (policy == BackgroundPolicy::mean_color) {
        background = mean_color(image);
    }
    Image out(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            out.set(x, y, mask.at(x, y) ? image.at(x, y) : background);
        }
    }
    return out;
}

SegmentedImage segment_sample(const Image& image, const SegmentationConfig& config) {
    config.validate();
    BinaryMask mask = refine_mask(build_mask(image, config.range), config.morphology);
    SegmentedImage out;
    out.mask = mask;
    out.foreground_fraction =
        static_cast<double>(mask.foreground_area()) / static_cast<double>(image.pixel_count());
    if (out.foreground_fraction < config.min_foreground_fraction) {
        out.fallback_used = true;
        out.image = image;
    } else {
        out.fallback_used = false;
        out.image = apply_mask(image, mask, config.background_policy);
    }
    return out;
}

const char* to_string(MorphOp op) {
    switch (op) {
    case MorphOp::erode: return "erode";
    case MorphOp::dilate: return "dilate";
    case MorphOp::open: return "open";
    case MorphOp::close: return "close";
    }
    return "?";
}

MorphOp morph_op_from_string(const std::string& s) {
    if (s == "erode") return MorphOp::erode;
    if (s == "dilate") return MorphOp::dilate;
    if (s == "open") return MorphOp::open;
    if (s == "close") return MorphOp::close;
    throw std::invalid_argument("unknown morphology op: " + s);
}

const char* to_string(BackgroundPolicy policy) {
    switch (policy) {
    case BackgroundPolicy::black: return "black";
    case BackgroundPolicy::white: return "white";
    case BackgroundPolicy::mean_color: return "mean_color";
    }
    return "?";
}

BackgroundPolicy background_policy_from_string(const std::string& s) {
    if (s == "black") return BackgroundPolicy::black;
    if (s == "white") return BackgroundPolicy::white;
    if (s == "mean_color") return BackgroundPolicy::mean_color;
    throw std::invalid_argument("unknown background policy: " + s);
}

}  // namespace hema
