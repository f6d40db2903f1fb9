#include "hema/image.hpp"

#include <stdexcept>

#include "hema/rng.hpp"

namespace hema {

Image::Image(int w, int h, Rgb fill) : width(w), height(h) {
    if (w < 0 || h < 0) {
        throw std::invalid_argument("image dimensions must be non-negative");
    }
    pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
        pixels[i] = fill.r;
        pixels[i + 1] = fill.g;
        pixels[i + 2] = fill.b;
    }
}

Image resize_nearest(const Image& src, int new_width, int new_height) {
    if (src.empty()) {
        throw std::invalid_argument("resize_nearest: empty source image");
    }
    if (new_width <= 0 || new_height <= 0) {
        throw std::invalid_argument("resize_nearest: target dimensions must be positive");
    }
    if (new_width == src.width && new_height == src.height) {
        return src;
    }
    Image out(new_width, new_height);
    for (int y = 0; y < new_height; ++y) {
        int sy = static_cast<int>((static_cast<std::int64_t>(y) * src.height) / new_height);
        if (sy >= src.height) sy = src.height - 1;
        for (int x = 0; x < new_width; ++x) {
            int sx = static_cast<int>((static_cast<std::int64_t>(x) * src.width) / new_width);
            if (sx >= src.width) sx = src.width - 1;
            out.set(x, y, src.at(sx, sy));
        }
    }
    return out;
}

Rgb mean_color(const Image& img) {
    if (img.empty()) return Rgb{};
    std::uint64_t r = 0, g = 0, b = 0;
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        r += img.pixels[i];
        g += img.pixels[i + 1];
        b += img.pixels[i + 2];
    }
    const std::uint64_t n = img.pixel_count();
    return Rgb{static_cast<std::uint8_t>((r + n / 2) / n),
               static_cast<std::uint8_t>((g + n / 2) / n),
               static_cast<std::uint8_t>((b + n / 2) / n)};
}

std::uint64_t image_digest(const Image& img) {
    std::uint64_t h = fnv1a64(&img.width, sizeof(img.width));
    h = fnv1a64(&img.height, sizeof(img.height), h);
    return fnv1a64(img.pixels.data(), img.pixels.size(), h);
}

}  // namespace hema
