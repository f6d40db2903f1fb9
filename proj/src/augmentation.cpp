#include "hema/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hema {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint8_t clamp_u8(double v) {
    const long long r = std::llround(v);
    if (r < 0) return 0;
    if (r > 255) return 255;
    return static_cast<std::uint8_t>(r);
}

Image hflip(const Image& in) {
    Image out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            out.set(x, y, in.at(in.width - 1 - x, y));
        }
    }
    return out;
}

Image vflip(const Image& in) {
    Image out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            out.set(x, y, in.at(x, in.height - 1 - y));
        }
    }
    return out;
}

// Inverse mapping with nearest sampling; out-of-range pixels fill black.
Image inverse_map(const Image& in, const std::function<void(double, double, double&, double&)>& src_of) {
    Image out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double sx = 0.0, sy = 0.0;
            src_of(static_cast<double>(x), static_cast<double>(y), sx, sy);
            const long long ix = std::llround(sx);
            const long long iy = std::llround(sy);
            if (ix >= 0 && iy >= 0 && ix < in.width && iy < in.height) {
                out.set(x, y, in.at(static_cast<int>(ix), static_cast<int>(iy)));
            }
        }
    }
    return out;
}

Image rotate_exact(const Image& in, double degrees) {
    const double theta = degrees * kPi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double cx = (in.width - 1) / 2.0;
    const double cy = (in.height - 1) / 2.0;
    return inverse_map(in, [&](double x, double y, double& sx, double& sy) {
        const double dx = x - cx;
        const double dy = y - cy;
        sx = cx + c * dx + s * dy;
        sy = cy - s * dx + c * dy;
    });
}

Image translate_exact(const Image& in, double fx, double fy) {
    const long long dx = std::llround(fx * in.width);
    const long long dy = std::llround(fy * in.height);
    return inverse_map(in, [&](double x, double y, double& sx, double& sy) {
        sx = x - static_cast<double>(dx);
        sy = y - static_cast<double>(dy);
    });
}

Image scale_exact(const Image& in, double factor) {
    const double cx = (in.width - 1) / 2.0;
    const double cy = (in.height - 1) / 2.0;
    return inverse_map(in, [&](double x, double y, double& sx, double& sy) {
        sx = cx + (x - cx) / factor;
        sy = cy + (y - cy) / factor;
    });
}

Image shear_exact(const Image& in, double kx, double ky) {
    const double cx = (in.width - 1) / 2.0;
    const double cy = (in.height - 1) / 2.0;
    return inverse_map(in, [&](double x, double y, double& sx, double& sy) {
        sx = x - kx * (y - cy);
        sy = y - ky * (x - cx);
    });
}

Image adjust_contrast(const Image& in, double factor) {
    Image out(in.width, in.height);
    for (std::size_t i = 0; i < in.pixels.size(); ++i) {
        out.pixels[i] = clamp_u8((static_cast<double>(in.pixels[i]) - 128.0) * factor + 128.0);
    }
    return out;
}

Image adjust_brightness(const Image& in, double factor) {
    Image out(in.width, in.height);
    for (std::size_t i = 0; i < in.pixels.size(); ++i) {
        out.pixels[i] = clamp_u8(static_cast<double>(in.pixels[i]) * factor);
    }
    return out;
}

Image adjust_sharpness(const Image& in, double alpha) {
    // blend against a 3x3 box blur; border cells average what exists
    Image out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            int sum[3] = {0, 0, 0};
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= in.width || ny >= in.height) continue;
                    const Rgb c = in.at(nx, ny);
                    sum[0] += c.r;
                    sum[1] += c.g;
                    sum[2] += c.b;
                    ++n;
                }
            }
            const Rgb c = in.at(x, y);
            const double blur[3] = {static_cast<double>(sum[0]) / n,
                                    static_cast<double>(sum[1]) / n,
                                    static_cast<double>(sum[2]) / n};
            out.set(x, y,
                    Rgb{clamp_u8(c.r + alpha * (c.r - blur[0])),
                        clamp_u8(c.g + alpha * (c.g - blur[1])),
                        clamp_u8(c.b + alpha * (c.b - blur[2]))});
        }
    }
    return out;
}

Image posterize(const Image& in, int keep_bits) {
    const auto mask = static_cast<std::uint8_t>(0xff << (8 - keep_bits));
    Image out(in.width, in.height);
    for (std::size_t i = 0; i < in.pixels.size(); ++i) {
        out.pixels[i] = static_cast<std::uint8_t>(in.pixels[i] & mask);
    }
    return out;
}

Image solarize(const Image& in, int threshold) {
    Image out(in.width, in.height);
    for (std::size_t i = 0; i < in.pixels.size(); ++i) {
        const int v = in.pixels[i];
        out.pixels[i] = static_cast<std::uint8_t>(v > threshold ? 255 - v : v);
    }
    return out;
}

}  // namespace

void AugmentationSpec::validate() const {
    if (probability < 0.0 || probability > 1.0) {
        throw std::invalid_argument("augmentation probability must be in [0, 1]");
    }
    switch (kind) {
    case AugKind::rotate:
        if (!std::isfinite(degrees)) throw std::invalid_argument("rotate degrees must be finite");
        break;
    case AugKind::translate:
        if (!std::isfinite(translate_x) || !std::isfinite(translate_y)) {
            throw std::invalid_argument("translate fractions must be finite");
        }
        break;
    case AugKind::scale:
        if (!(scale_factor > 0.0) || !std::isfinite(scale_factor)) {
            throw std::invalid_argument("scale factor must be positive and finite");
        }
        break;
    case AugKind::random_erase:
        if (erase_area_min < 0.0 || erase_area_max >= 1.0 || erase_area_min > erase_area_max) {
            throw std::invalid_argument("erase area range must satisfy 0 <= min <= max < 1");
        }
        if (!(erase_aspect_min > 0.0) || erase_aspect_min > erase_aspect_max) {
            throw std::invalid_argument("erase aspect range must satisfy 0 < min <= max");
        }
        break;
    case AugKind::randaugment:
        if (ra_ops < 0) throw std::invalid_argument("randaugment op count must be >= 0");
        if (ra_magnitude < 0 || ra_magnitude > 30) {
            throw std::invalid_argument("randaugment magnitude must be in [0, 30]");
        }
        break;
    case AugKind::mosaic:
        if (mosaic_center_jitter < 0.0 || mosaic_center_jitter >= 0.5) {
            throw std::invalid_argument("mosaic center jitter must be in [0, 0.5)");
        }
        break;
    default:
        break;
    }
}

Image geometric_transform(const Image& image, const AugmentationSpec& spec, Rng&) {
    switch (spec.kind) {
    case AugKind::hflip:
        return hflip(image);
    case AugKind::vflip:
        return vflip(image);
    case AugKind::rotate:
        return rotate_exact(image, spec.degrees);
    case AugKind::translate:
        return translate_exact(image, spec.translate_x, spec.translate_y);
    case AugKind::scale:
        return scale_exact(image, spec.scale_factor);
    default:
        throw std::invalid_argument(std::string("not a geometric transform: ") +
                                    to_string(spec.kind));
    }
}

Image random_erase(const Image& image, const AugmentationSpec& spec, Rng& rng) {
    const double area_fraction = rng.uniform(spec.erase_area_min, spec.erase_area_max);
    const double aspect = rng.uniform(spec.erase_aspect_min, spec.erase_aspect_max);
    const double target = area_fraction * image.pixel_count();

    auto rect_w = static_cast<long long>(std::llround(std::sqrt(target * aspect)));
    auto rect_h = static_cast<long long>(std::llround(std::sqrt(target / aspect)));
    rect_w = std::min<long long>(rect_w, image.width);
    rect_h = std::min<long long>(rect_h, image.height);
    if (rect_w <= 0 || rect_h <= 0) return image;

    const auto x0 = rng.uniform_int(0, image.width - rect_w);
    const auto y0 = rng.uniform_int(0, image.height - rect_h);

    Image out = image;
    for (long long y = y0; y < y0 + rect_h; ++y) {
        for (long long x = x0; x < x0 + rect_w; ++x) {
            Rgb fill{0, 0, 0};
            switch (spec.erase_fill) {
            case EraseFill::noise:
                fill = Rgb{static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                           static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                           static_cast<std::uint8_t>(rng.uniform_int(0, 255))};
                break;
            case EraseFill::black:
                fill = Rgb{0, 0, 0};
                break;
            case EraseFill::white:
                fill = Rgb{255, 255, 255};
                break;
            }
            out.set(static_cast<int>(x), static_cast<int>(y), fill);
        }
    }
    return out;
}

std::pair<Image, ClassLabel> mosaic(const std::array<Image, 4>& images,
                                    const std::array<ClassLabel, 4>& labels,
                                    int target_width, int target_height,
                                    double center_jitter, Rng& rng) {
    for (int i = 1; i < 4; ++i) {
        if (labels[static_cast<std::size_t>(i)] != labels[0]) {
            throw std::invalid_argument("mosaic requires four images of the same class");
        }
    }
    for (const auto& img : images) {
        if (img.empty()) throw std::invalid_argument("mosaic input image is empty");
    }
    if (target_width < 2 || target_height < 2) {
        throw std::invalid_argument("mosaic target size must be at least 2x2");
    }

    auto pick_center = [&](int extent) {
        const double f = 0.5 + rng.uniform(-center_jitter, center_jitter);
        auto c = static_cast<int>(std::llround(f * extent));
        return std::clamp(c, 1, extent - 1);
    };
    const int cx = pick_center(target_width);
    const int cy = pick_center(target_height);

    Image out(target_width, target_height);
    const int qx[4] = {0, cx, 0, cx};
    const int qy[4] = {0, 0, cy, cy};
    const int qw[4] = {cx, target_width - cx, cx, target_width - cx};
    const int qh[4] = {cy, cy, target_height - cy, target_height - cy};
    for (int q = 0; q < 4; ++q) {
        const Image tile = resize_nearest(images[static_cast<std::size_t>(q)], qw[q], qh[q]);
        for (int y = 0; y < qh[q]; ++y) {
            for (int x = 0; x < qw[q]; ++x) {
                out.set(qx[q] + x, qy[q] + y, tile.at(x, y));
            }
        }
    }
    return {out, labels[0]};
}

Image rand_augment(const Image& image, int n, int m, Rng& rng) {
    if (n < 0) throw std::invalid_argument("randaugment op count must be >= 0");
    if (m < 0 || m > 30) throw std::invalid_argument("randaugment magnitude must be in [0, 30]");

    const double level = static_cast<double>(m) / 30.0;
    Image out = image;
    for (int i = 0; i < n; ++i) {
        const auto op = rng.uniform_int(0, 9);
        switch (op) {
        case 0:
            out = rotate_exact(out, rng.sign() * level * 30.0);
            break;
        case 1:
            out = translate_exact(out, rng.sign() * level * 0.3, 0.0);
            break;
        case 2:
            out = translate_exact(out, 0.0, rng.sign() * level * 0.3);
            break;
        case 3:
            out = shear_exact(out, rng.sign() * level * 0.3, 0.0);
            break;
        case 4:
            out = shear_exact(out, 0.0, rng.sign() * level * 0.3);
            break;
        case 5:
            out = adjust_contrast(out, 1.0 + rng.sign() * level * 0.9);
            break;
        case 6:
            out = adjust_brightness(out, 1.0 + rng.sign() * level * 0.9);
            break;
        case 7:
            out = adjust_sharpness(out, rng.sign() * level * 0.9);
            break;
        case 8:
            out = posterize(out, 8 - static_cast<int>(std::llround(level * 4.0)));
            break;
        case 9:
            out = solarize(out, 255 - static_cast<int>(std::llround(level * 255.0)));
            break;
        default:
            break;
        }
    }
    return out;
}

AugmentationPipeline build_pipeline(const nlohmann::json& section, std::uint64_t default_seed) {
    AugmentationPipeline pipeline;
    pipeline.seed = section.value("seed", default_seed);

    const auto specs = section.value("specs", nlohmann::json::array());
    std::size_t index = 0;
    for (const auto& js : specs) {
        AugmentationSpec spec;
        try {
            spec.kind = aug_kind_from_string(js.at("kind").get<std::string>());
            spec.probability = js.value("probability", 1.0);
            switch (spec.kind) {
            case AugKind::rotate:
                spec.degrees = js.at("degrees").get<double>();
                break;
            case AugKind::translate:
                spec.translate_x = js.value("x", 0.0);
                spec.translate_y = js.value("y", 0.0);
                break;
            case AugKind::scale:
                spec.scale_factor = js.at("factor").get<double>();
                break;
            case AugKind::random_erase:
                spec.erase_area_min = js.value("area_min", 0.02);
                spec.erase_area_max = js.value("area_max", 0.10);
                spec.erase_aspect_min = js.value("aspect_min", 0.5);
                spec.erase_aspect_max = js.value("aspect_max", 2.0);
                spec.erase_fill = erase_fill_from_string(js.value("fill", "noise"));
                break;
            case AugKind::randaugment:
                spec.ra_ops = js.value("ops", 2);
                spec.ra_magnitude = js.value("magnitude", 9);
                break;
            case AugKind::mosaic:
                spec.mosaic_center_jitter = js.value("center_jitter", 0.2);
                break;
            default:
                break;
            }
            spec.validate();
        } catch (const std::exception& e) {
            throw std::runtime_error("augmentation spec " + std::to_string(index) +
                                     " is invalid: " + e.what());
        }
        pipeline.specs.push_back(spec);
        ++index;
    }
    return pipeline;
}

Image apply_pipeline(const AugmentationPipeline& pipeline, const Image& image,
                     ClassLabel label, std::string_view instance_key,
                     const MosaicSource* mosaic_source) {
    Rng rng(derive_seed(pipeline.seed, instance_key));
    Image out = image;
    for (const auto& spec : pipeline.specs) {
        if (!rng.coin(spec.probability)) continue;
        switch (spec.kind) {
        case AugKind::hflip:
        case AugKind::vflip:
        case AugKind::rotate:
        case AugKind::translate:
        case AugKind::scale:
            out = geometric_transform(out, spec, rng);
            break;
        case AugKind::random_erase:
            out = random_erase(out, spec, rng);
            break;
        case AugKind::randaugment:
            out = rand_augment(out, spec.ra_ops, spec.ra_magnitude, rng);
            break;
        case AugKind::mosaic: {
            if (mosaic_source == nullptr || !(*mosaic_source)) {
                throw std::runtime_error("mosaic augmentation requires a same-class image source");
            }
            const auto extra = (*mosaic_source)(label, rng);
            auto [composed, out_label] =
                mosaic({out, extra[0], extra[1], extra[2]}, {label, label, label, label},
                       out.width, out.height, spec.mosaic_center_jitter, rng);
            (void)out_label;
            out = std::move(composed);
            break;
        }
        }
    }
    return out;
}

const char* to_string(AugKind kind) {
    switch (kind) {
    case AugKind::hflip: return "hflip";
    case AugKind::vflip: return "vflip";
    case AugKind::rotate: return "rotate";
    case AugKind::translate: return "translate";
    case AugKind::scale: return "scale";
    case AugKind::mosaic: return "mosaic";
    case AugKind::random_erase: return "random_erase";
    case AugKind::randaugment: return "randaugment";
    }
    return "?";
}

AugKind aug_kind_from_string(const std::string& s) {
    if (s == "hflip") return AugKind::hflip;
    if (s == "vflip") return AugKind::vflip;
    if (s == "rotate") return AugKind::rotate;
    if (s == "translate") return AugKind::translate;
    if (s == "scale") return AugKind::scale;
    if (s == "mosaic") return AugKind::mosaic;
    if (s == "random_erase") return AugKind::random_erase;
    if (s == "randaugment") return AugKind::randaugment;
    throw std::invalid_argument("unknown augmentation kind: " + s);
}

const char* to_string(EraseFill fill) {
    switch (fill) {
    case EraseFill::noise: return "noise";
    case EraseFill::black: return "black";
    case EraseFill::white: return "white";
    }
    return "?";
}

EraseFill erase_fill_from_string(const std::string& s) {
    if (s == "noise") return EraseFill::noise;
    if (s == "black") return EraseFill::black;
    if (s == "white") return EraseFill::white;
    throw std::invalid_argument("unknown erase fill: " + s);
}

}  // namespace hema
