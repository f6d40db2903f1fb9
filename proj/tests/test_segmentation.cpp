#include <doctest.h>

#include <cmath>

#include "hema/rng.hpp"
#include "hema/segmentation.hpp"

using namespace hema;

namespace {

// Reference hexcone conversion, written against the formula rather than
// sharing code with the library.
void reference_hsv(int r, int g, int b, double& h, double& s, double& v) {
    const double rf = r / 255.0, gf = g / 255.0, bf = b / 255.0;
    const double mx = std::fmax(rf, std::fmax(gf, bf));
    const double mn = std::fmin(rf, std::fmin(gf, bf));
    v = mx;
    s = mx > 0.0 ? (mx - mn) / mx : 0.0;
    if (mx == mn) {
        h = 0.0;
        return;
    }
    const double d = mx - mn;
    if (mx == rf) {
        h = std::fmod(60.0 * ((gf - bf) / d) + 360.0, 360.0);
    } else if (mx == gf) {
        h = 60.0 * ((bf - rf) / d) + 120.0;
    } else {
        h = 60.0 * ((rf - gf) / d) + 240.0;
    }
}

Image random_image(Rng& rng, int w, int h) {
    Image img(w, h);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    return img;
}

BinaryMask random_mask(Rng& rng, int w, int h) {
    BinaryMask mask(w, h);
    for (auto& b : mask.bits) b = rng.coin(0.5) ? 1 : 0;
    return mask;
}

BinaryMask complement(const BinaryMask& mask) {
    BinaryMask out = mask;
    for (auto& b : out.bits) b = b ? 0 : 1;
    return out;
}

}  // namespace

TEST_SUITE("segmentation") {

TEST_CASE("pure red converts to hue 0 with full saturation and value") {
    const auto hsv = rgb_to_hsv({255, 0, 0});
    CHECK(hsv.h == 0.0);
    CHECK(hsv.s == 1.0);
    CHECK(hsv.v == 1.0);
}

TEST_CASE("achromatic gray has zero hue and saturation") {
    const auto hsv = rgb_to_hsv({128, 128, 128});
    CHECK(hsv.h == 0.0);
    CHECK(hsv.s == 0.0);
    CHECK(hsv.v == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
}

TEST_CASE("conversion matches the reference hexcone formula") {
    {
        const auto hsv = rgb_to_hsv({100, 50, 200});
        double h, s, v;
        reference_hsv(100, 50, 200, h, s, v);
        CHECK(std::abs(hsv.h - h) <= 1e-9);
        CHECK(std::abs(hsv.s - s) <= 1e-9);
        CHECK(std::abs(hsv.v - v) <= 1e-9);
    }
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const int r = static_cast<int>(rng.uniform_int(0, 255));
        const int g = static_cast<int>(rng.uniform_int(0, 255));
        const int b = static_cast<int>(rng.uniform_int(0, 255));
        const auto hsv = rgb_to_hsv({static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                     static_cast<std::uint8_t>(b)});
        double h, s, v;
        reference_hsv(r, g, b, h, s, v);
        CHECK(std::abs(hsv.h - h) <= 1e-9);
        CHECK(std::abs(hsv.s - s) <= 1e-9);
        CHECK(std::abs(hsv.v - v) <= 1e-9);
    }
}

TEST_CASE("hue intervals may wrap around zero") {
    HsvRange range;
    range.hue_min = 350.0;
    range.hue_max = 20.0;
    range.sat_min = 0.0;
    range.val_min = 0.0;
    CHECK(range.contains({5.0, 0.5, 0.5}));
    CHECK(range.contains({355.0, 0.5, 0.5}));
    CHECK(!range.contains({100.0, 0.5, 0.5}));
}

TEST_CASE("range bounds are validated") {
    HsvRange range;
    range.sat_min = 0.8;
    range.sat_max = 0.2;
    CHECK_THROWS_AS(range.validate(), std::invalid_argument);
    range = HsvRange{};
    range.val_min = -0.1;
    CHECK_THROWS_AS(range.validate(), std::invalid_argument);
}

TEST_CASE("mask is empty when nothing is in range and full when everything is") {
    HsvRange range;  // default 110..170 deg
    Image red(8, 6, Rgb{200, 10, 10});
    CHECK(build_mask(red, range).foreground_area() == 0);

    Image teal(8, 6, hsv_to_rgb({140.0, 0.6, 0.6}));
    CHECK(build_mask(teal, range).foreground_area() == 8 * 6);
}

TEST_CASE("a purple square on black is masked exactly") {
    HsvRange range;
    Image img(32, 32, Rgb{0, 0, 0});
    const Rgb stained = hsv_to_rgb({150.0, 0.6, 0.7});
    for (int y = 10; y < 20; ++y) {
        for (int x = 4; x < 14; ++x) img.set(x, y, stained);
    }
    const auto mask = build_mask(img, range);
    CHECK(mask.foreground_area() == 100);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            const bool inside = x >= 4 && x < 14 && y >= 10 && y < 20;
            CHECK(mask.at(x, y) == inside);
        }
    }
}

TEST_CASE("build_mask agrees with the per-pixel predicate loop on random images") {
    Rng rng(17);
    HsvRange range;
    range.hue_min = 90.0;
    range.hue_max = 200.0;
    range.sat_min = 0.2;
    range.val_min = 0.1;
    for (int trial = 0; trial < 25; ++trial) {
        const auto img = random_image(rng, 24, 18);
        const auto mask = build_mask(img, range);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                const auto hsv = rgb_to_hsv(img.at(x, y));
                const bool in_range = hsv.h >= range.hue_min && hsv.h <= range.hue_max &&
                                      hsv.s >= range.sat_min && hsv.s <= range.sat_max &&
                                      hsv.v >= range.val_min && hsv.v <= range.val_max;
                REQUIRE(mask.at(x, y) == in_range);
            }
        }
    }
}

TEST_CASE("an empty morphology list leaves the mask unchanged") {
    Rng rng(3);
    const auto mask = random_mask(rng, 12, 9);
    CHECK(refine_mask(mask, {}) == mask);
}

TEST_CASE("opening removes an isolated pixel") {
    BinaryMask mask(9, 9);
    mask.set(4, 4, true);
    const auto refined = refine_mask(mask, {{MorphOp::open, 1}, {MorphOp::close, 1}});
    CHECK(refined.foreground_area() == 0);
}

TEST_CASE("dilating a full mask keeps it full") {
    BinaryMask mask(7, 5, true);
    CHECK(dilate(mask, 1) == mask);
    CHECK(dilate(mask, 2) == mask);
}

TEST_CASE("closing fills a small hole") {
    BinaryMask mask(11, 11, true);
    mask.set(5, 5, false);
    const auto refined = refine_mask(mask, {{MorphOp::close, 1}});
    CHECK(refined.foreground_area() == 11 * 11);
}

TEST_CASE("dilation of the complement is the complement of erosion") {
    Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const int w = static_cast<int>(rng.uniform_int(1, 16));
        const int h = static_cast<int>(rng.uniform_int(1, 16));
        const int radius = static_cast<int>(rng.uniform_int(1, 3));
        const auto mask = random_mask(rng, w, h);
        CHECK(dilate(complement(mask), radius) == complement(erode(mask, radius)));
    }
}

TEST_CASE("a full mask copies the image verbatim") {
    Rng rng(31);
    const auto img = random_image(rng, 10, 8);
    BinaryMask mask(10, 8, true);
    CHECK(apply_mask(img, mask, BackgroundPolicy::black) == img);
}

TEST_CASE("an empty mask with the black policy blanks the image") {
    Rng rng(37);
    const auto img = random_image(rng, 10, 8);
    BinaryMask mask(10, 8, false);
    const auto out = apply_mask(img, mask, BackgroundPolicy::black);
    for (auto p : out.pixels) CHECK(p == 0);
}

TEST_CASE("checkerboard selection matches a direct loop") {
    Rng rng(41);
    const auto img = random_image(rng, 12, 12);
    BinaryMask mask(12, 12);
    for (int y = 0; y < 12; ++y) {
        for (int x = 0; x < 12; ++x) mask.set(x, y, (x + y) % 2 == 0);
    }
    for (auto policy : {BackgroundPolicy::black, BackgroundPolicy::white,
                        BackgroundPolicy::mean_color}) {
        const auto out = apply_mask(img, mask, policy);
        Rgb bg{0, 0, 0};
        if (policy == BackgroundPolicy::white) bg = Rgb{255, 255, 255};
        if (policy == BackgroundPolicy::mean_color) bg = mean_color(img);
        for (int y = 0; y < 12; ++y) {
            for (int x = 0; x < 12; ++x) {
                REQUIRE(out.at(x, y) == (mask.at(x, y) ? img.at(x, y) : bg));
            }
        }
    }
}

TEST_CASE("apply_mask rejects mismatched dimensions") {
    Image img(4, 4);
    BinaryMask mask(5, 4);
    CHECK_THROWS_AS(apply_mask(img, mask, BackgroundPolicy::black), std::invalid_argument);
}

TEST_CASE("masking is idempotent under the black policy") {
    Rng rng(43);
    const auto img = random_image(rng, 14, 9);
    const auto mask = random_mask(rng, 14, 9);
    const auto once = apply_mask(img, mask, BackgroundPolicy::black);
    CHECK(apply_mask(once, mask, BackgroundPolicy::black) == once);
}

TEST_CASE("widening the range never shrinks the foreground") {
    Rng rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        const auto img = random_image(rng, 16, 16);
        HsvRange narrow;
        narrow.hue_min = 100.0;
        narrow.hue_max = 180.0;
        narrow.sat_min = 0.3;
        narrow.val_min = 0.3;
        HsvRange wide = narrow;
        wide.hue_min = 80.0;
        wide.hue_max = 220.0;
        wide.sat_min = 0.1;
        wide.val_min = 0.1;
        CHECK(build_mask(img, wide).foreground_area() >=
              build_mask(img, narrow).foreground_area());
    }
}

TEST_CASE("segmentation keeps a large blob and reports its fraction") {
    SegmentationConfig config;
    config.morphology.clear();
    config.min_foreground_fraction = 0.01;
    Image img(20, 20, Rgb{0, 0, 0});
    const Rgb stained = hsv_to_rgb({140.0, 0.6, 0.7});
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 6; ++x) img.set(x, y, stained);  // 30% of pixels
    }
    const auto segmented = segment_sample(img, config);
    CHECK(!segmented.fallback_used);
    CHECK(segmented.foreground_fraction == doctest::Approx(0.30).epsilon(1e-9));
    CHECK(segmented.mask.foreground_area() == 120);
}

TEST_CASE("a fully out-of-range image falls back to the original") {
    SegmentationConfig config;
    Image img(16, 16, Rgb{210, 40, 40});
    const auto segmented = segment_sample(img, config);
    CHECK(segmented.fallback_used);
    CHECK(segmented.image == img);
    CHECK(segmented.foreground_fraction == 0.0);
}

TEST_CASE("threshold zero never triggers the fallback") {
    SegmentationConfig config;
    config.min_foreground_fraction = 0.0;
    Image img(16, 16, Rgb{210, 40, 40});
    const auto segmented = segment_sample(img, config);
    CHECK(!segmented.fallback_used);
    for (auto p : segmented.image.pixels) CHECK(p == 0);
}

TEST_CASE("fallback fires exactly when the fraction is below the threshold") {
    Rng rng(53);
    SegmentationConfig config;
    config.min_foreground_fraction = 0.25;
    config.morphology.clear();
    for (int trial = 0; trial < 20; ++trial) {
        const auto img = random_image(rng, 12, 12);
        const auto segmented = segment_sample(img, config);
        CHECK(segmented.fallback_used ==
              (segmented.foreground_fraction < config.min_foreground_fraction));
        if (segmented.fallback_used) CHECK(segmented.image == img);
    }
}

}  // TEST_SUITE
