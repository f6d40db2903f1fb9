#include "hema/fixtures.hpp"

#include <cmath>
#include <string>

#include "hema/color.hpp"
#include "hema/dataset.hpp"
#include "hema/image_io.hpp"
#include "hema/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hema {
namespace fixtures {

Image toy_image(int size, double blob_hue, std::uint64_t seed) {
    Rng rng(seed);
    Image img(size, size, Rgb{235, 214, 223});  // pale smear background, hue ~334

    const double cx = size * rng.uniform(0.35, 0.65);
    const double cy = size * rng.uniform(0.35, 0.65);
    const double radius = size * rng.uniform(0.18, 0.28);

    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            if (dx * dx + dy * dy > radius * radius) continue;
            Hsv hsv;
            hsv.h = blob_hue + rng.uniform(-6.0, 6.0);
            hsv.s = rng.uniform(0.45, 0.75);
            hsv.v = rng.uniform(0.45, 0.80);
            img.set(x, y, hsv_to_rgb(hsv));
        }
    }

    // nucleus holes for close() to fill
    for (int i = 0; i < 3; ++i) {
        const int hx = static_cast<int>(cx + rng.uniform(-radius * 0.5, radius * 0.5));
        const int hy = static_cast<int>(cy + rng.uniform(-radius * 0.5, radius * 0.5));
        if (hx >= 0 && hy >= 0 && hx < size && hy < size) {
            img.set(hx, hy, Rgb{235, 214, 223});
        }
    }
    // isolated stained specks for open() to drop
    for (int i = 0; i < 4; ++i) {
        const int sx = static_cast<int>(rng.uniform_int(0, size - 1));
        const int sy = static_cast<int>(rng.uniform_int(0, size - 1));
        const double d = std::hypot(sx - cx, sy - cy);
        if (d > radius + 3.0) {
            img.set(sx, sy, hsv_to_rgb(Hsv{blob_hue, 0.6, 0.6}));
        }
    }
    return img;
}

namespace {

void write_class_dir(const fs::path& dir, int count, int size, double hue, std::uint64_t seed) {
    fs::create_directories(dir);
    for (int i = 0; i < count; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "img_%03d.png", i);
        save_image(toy_image(size, hue, derive_seed(seed, dir.filename().string() +
                                                              "/" + name)),
                   dir / name);
    }
}

}  // namespace

void write_toy_datasets(const fs::path& root, const ToyOptions& options) {
    const double normal_hue = 120.0;
    const double cancer_hue = 160.0;
    write_class_dir(root / "all_image" / "Benign", options.images_per_class, options.image_size,
                    normal_hue, options.seed);
    write_class_dir(root / "all_image" / "Early", options.images_per_class, options.image_size,
                    cancer_hue, options.seed + 1);
    write_class_dir(root / "all_image" / "Pre", options.images_per_class, options.image_size,
                    cancer_hue, options.seed + 2);
    write_class_dir(root / "all_image" / "Pro", options.images_per_class, options.image_size,
                    cancer_hue, options.seed + 3);
    write_class_dir(root / "all_idb1" / "Normal", options.images_per_class, options.image_size,
                    normal_hue, options.seed + 4);
    write_class_dir(root / "all_idb1" / "Cancer", options.images_per_class, options.image_size,
                    cancer_hue, options.seed + 5);
}

void write_overfit_fixture(const fs::path& dir, int per_class, int image_size) {
    const Rgb normal_colors[] = {
        {40, 80, 200}, {60, 120, 220}, {20, 60, 180}, {80, 140, 240},
        {30, 100, 210}, {50, 90, 190}, {70, 110, 230}, {90, 130, 250}};
    const Rgb cancer_colors[] = {
        {200, 60, 40}, {220, 100, 60}, {180, 40, 20}, {240, 120, 80},
        {210, 80, 30}, {190, 50, 50}, {230, 90, 70}, {250, 110, 90}};
    fs::create_directories(dir / "Normal");
    fs::create_directories(dir / "Cancer");
    for (int i = 0; i < per_class && i < 8; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "img_%03d.png", i);
        save_image(Image(image_size, image_size, normal_colors[i]), dir / "Normal" / name);
        save_image(Image(image_size, image_size, cancer_colors[i]), dir / "Cancer" / name);
    }
}

json toy_config(const std::string& fixture_subdir, const std::string& out_subdir,
                const std::string& comparison_rows, std::uint64_t seed) {
    json j;
    j["seed"] = seed;
    j["out_dir"] = out_subdir;
    j["datasets"] = json::array({
        {{"kind", "ALL_IMAGE"}, {"root", fixture_subdir + "/all_image"}},
        {{"kind", "ALL_IDB1"}, {"root", fixture_subdir + "/all_idb1"}},
    });
    j["split"] = {{"ratios", {0.7, 0.15, 0.15}}};
    j["segmentation"] = {
        {"hue_min", 110.0}, {"hue_max", 170.0},
        {"sat_min", 0.25},  {"sat_max", 1.0},
        {"val_min", 0.20},  {"val_max", 1.0},
        {"morphology", json::array({{{"op", "open"}, {"radius", 1}},
                                    {{"op", "close"}, {"radius", 2}}})},
        {"min_foreground_fraction", 0.01},
        {"background_policy", "black"},
        {"write_masks", true},
    };
    j["augmentation"] = {
        {"specs", json::array({
            {{"kind", "hflip"}, {"probability", 0.5}},
            {{"kind", "rotate"}, {"degrees", 10.0}, {"probability", 0.5}},
            {{"kind", "random_erase"}, {"area_min", 0.02}, {"area_max", 0.08},
             {"probability", 0.5}},
            {{"kind", "randaugment"}, {"ops", 1}, {"magnitude", 5}, {"probability", 0.5}},
            {{"kind", "mosaic"}, {"center_jitter", 0.2}, {"probability", 0.25}},
        })},
    };
    j["training"] = {
        {"backend", "reference_cnn"},
        {"epochs", 30},
        {"optimizer", "adamw"},
        {"learning_rate", 0.004},
        {"batch_size", 8},
        {"input_resolution", 64},
        {"freeze_backbone_epochs", 0},
        {"deterministic", true},
    };
    j["evaluate"] = {{"split", "test"}, {"positive_class", "Cancer"}};
    j["report"] = {{"comparison_rows", comparison_rows}};
    return j;
}

}  // namespace fixtures
}  // namespace hema
