#include "hema/image_io.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace hema {

namespace {

std::string lower_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

}  // namespace

bool has_accepted_image_extension(const std::filesystem::path& p) {
    const std::string ext = lower_extension(p);
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" ||
           ext == ".tif" || ext == ".tiff";
}

Image load_image(const std::filesystem::path& p) {
    cv::Mat mat = cv::imread(p.string(), cv::IMREAD_COLOR);
    if (mat.empty()) {
        throw std::runtime_error("failed to decode image: " + p.string());
    }
    Image img(mat.cols, mat.rows);
    for (int y = 0; y < mat.rows; ++y) {
        const auto* row = mat.ptr<cv::Vec3b>(y);
        for (int x = 0; x < mat.cols; ++x) {
            // OpenCV loads BGR
            img.set(x, y, Rgb{row[x][2], row[x][1], row[x][0]});
        }
    }
    return img;
}

void save_image(const Image& img, const std::filesystem::path& p) {
    if (img.empty()) {
        throw std::invalid_argument("save_image: empty image");
    }
    cv::Mat mat(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        auto* row = mat.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width; ++x) {
            const Rgb c = img.at(x, y);
            row[x] = cv::Vec3b(c.b, c.g, c.r);
        }
    }
    if (!cv::imwrite(p.string(), mat)) {
        throw std::runtime_error("failed to write image: " + p.string());
    }
}

void save_mask_png(const BinaryMask& mask, const std::filesystem::path& p) {
    cv::Mat mat(mask.height, mask.width, CV_8UC1);
    for (int y = 0; y < mask.height; ++y) {
        auto* row = mat.ptr<std::uint8_t>(y);
        for (int x = 0; x < mask.width; ++x) {
            row[x] = mask.at(x, y) ? 255 : 0;
        }
    }
    const std::vector<int> params = {cv::IMWRITE_PNG_BILEVEL, 1};
    if (!cv::imwrite(p.string(), mat, params)) {
        throw std::runtime_error("failed to write mask: " + p.string());
    }
}

bool can_decode_image(const std::filesystem::path& p) {
    cv::Mat mat = cv::imread(p.string(), cv::IMREAD_COLOR);
    return !mat.empty();
}

}  // namespace hema
