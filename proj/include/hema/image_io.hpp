#pragma once

#include <filesystem>

#include "hema/image.hpp"
#include "hema/mask.hpp"

namespace hema {

// Accepted image formats. Extension check is case-insensitive.
bool has_accepted_image_extension(const std::filesystem::path& p);

// Throws std::runtime_error with the path on decode failure.
Image load_image(const std::filesystem::path& p);

// Format chosen by extension; PNG output is lossless and byte-stable.
void save_image(const Image& img, const std::filesystem::path& p);

// 1-bit PNG, foreground white.
void save_mask_png(const BinaryMask& mask, const std::filesystem::path& p);

// Decode check without keeping the pixels.
bool can_decode_image(const std::filesystem::path& p);

}  // namespace hema
