#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "hema/image.hpp"

namespace hema {
namespace fixtures {

struct ToyOptions {
    int images_per_class = 6;
    int image_size = 64;
    std::uint64_t seed = 7;
};

// Synthetic smear: light pink background, one purple-stained blob whose hue
// tells the merged class apart (120 deg for the Normal side, 160 deg for
// the Cancer side), plus speckles and holes for the morphology to clean.
Image toy_image(int size, double blob_hue, std::uint64_t seed);

// Writes <root>/all_image/{Benign,Early,Pre,Pro}/img_NNN.png and
// <root>/all_idb1/{Normal,Cancer}/img_NNN.png.
void write_toy_datasets(const std::filesystem::path& root, const ToyOptions& options = {});

// Eight uniform-color images, four per class, under <dir>/{Normal,Cancer}.
void write_overfit_fixture(const std::filesystem::path& dir, int per_class = 4,
                           int image_size = 32);

// Pipeline config document wired to the toy datasets; out_dir and the
// comparison-rows path are stored relative to wherever the config lands.
nlohmann::json toy_config(const std::string& fixture_subdir, const std::string& out_subdir,
                          const std::string& comparison_rows, std::uint64_t seed);

}  // namespace fixtures
}  // namespace hema
