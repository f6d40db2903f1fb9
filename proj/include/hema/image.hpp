#pragma once

#include <cstdint>
#include <vector>

namespace hema {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    bool operator==(const Rgb&) const = default;
};

// 8-bit RGB image, interleaved, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    Image() = default;
    Image(int w, int h, Rgb fill = Rgb{});

    bool empty() const { return width <= 0 || height <= 0; }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    Rgb at(int x, int y) const {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        return Rgb{pixels[i], pixels[i + 1], pixels[i + 2]};
    }

    void set(int x, int y, Rgb c) {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        pixels[i] = c.r;
        pixels[i + 1] = c.g;
        pixels[i + 2] = c.b;
    }

    bool operator==(const Image&) const = default;
};

Image resize_nearest(const Image& src, int new_width, int new_height);

Rgb mean_color(const Image& img);

std::uint64_t image_digest(const Image& img);

}  // namespace hema
