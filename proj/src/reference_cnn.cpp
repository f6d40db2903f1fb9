#include "hema/reference_cnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "hema/rng.hpp"

using nlohmann::json;

namespace hema {

namespace {

void conv3x3_forward(const std::vector<double>& in, int in_c, int h, int w,
                     const std::vector<double>& weights, const std::vector<double>& bias,
                     int out_c, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(out_c) * h * w, 0.0);
    for (int oc = 0; oc < out_c; ++oc) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = bias[static_cast<std::size_t>(oc)];
                for (int ic = 0; ic < in_c; ++ic) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int sy = y + ky - 1;
                        if (sy < 0 || sy >= h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int sx = x + kx - 1;
                            if (sx < 0 || sx >= w) continue;
                            acc += weights[((static_cast<std::size_t>(oc) * in_c + ic) * 3 + ky) * 3 + kx] *
                                   in[(static_cast<std::size_t>(ic) * h + sy) * w + sx];
                        }
                    }
                }
                out[(static_cast<std::size_t>(oc) * h + y) * w + x] = acc;
            }
        }
    }
}

void conv3x3_backward(const std::vector<double>& in, int in_c, int h, int w,
                      const std::vector<double>& weights, std::vector<double>& gw,
                      std::vector<double>& gb, int out_c, const std::vector<double>& dout,
                      std::vector<double>* din) {
    if (din) din->assign(in.size(), 0.0);
    for (int oc = 0; oc < out_c; ++oc) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double d = dout[(static_cast<std::size_t>(oc) * h + y) * w + x];
                if (d == 0.0) continue;
                gb[static_cast<std::size_t>(oc)] += d;
                for (int ic = 0; ic < in_c; ++ic) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int sy = y + ky - 1;
                        if (sy < 0 || sy >= h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int sx = x + kx - 1;
                            if (sx < 0 || sx >= w) continue;
                            const auto wi =
                                ((static_cast<std::size_t>(oc) * in_c + ic) * 3 + ky) * 3 + kx;
                            const auto ii = (static_cast<std::size_t>(ic) * h + sy) * w + sx;
                            gw[wi] += d * in[ii];
                            if (din) (*din)[ii] += weights[wi] * d;
                        }
                    }
                }
            }
        }
    }
}

// 2x2 stride 2, relu fused on the way in; argmax stores the index into the
// pre-activation tensor (first maximum wins on ties).
void relu_maxpool2(const std::vector<double>& z, int c, int h, int w,
                   std::vector<double>& out, std::vector<int>& argmax) {
    const int h2 = h / 2;
    const int w2 = w / 2;
    out.assign(static_cast<std::size_t>(c) * h2 * w2, 0.0);
    argmax.assign(static_cast<std::size_t>(c) * h2 * w2, 0);
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h2; ++y) {
            for (int x = 0; x < w2; ++x) {
                double best = -std::numeric_limits<double>::infinity();
                int best_index = 0;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const auto ii =
                            (static_cast<std::size_t>(ch) * h + (2 * y + dy)) * w + (2 * x + dx);
                        if (z[ii] > best) {
                            best = z[ii];
                            best_index = static_cast<int>(ii);
                        }
                    }
                }
                const auto oi = (static_cast<std::size_t>(ch) * h2 + y) * w2 + x;
                out[oi] = best > 0.0 ? best : 0.0;
                argmax[oi] = best_index;
            }
        }
    }
}

}  // namespace

ReferenceCnn::ReferenceCnn(const BackendOptions& options) {
    resolution_ = options.input_resolution > 0 ? options.input_resolution : kDefaultResolution;
    if (resolution_ < 4) {
        throw std::invalid_argument("reference_cnn input resolution must be >= 4");
    }
    num_classes_ = options.num_classes;
    if (num_classes_ < 2) {
        throw std::invalid_argument("reference_cnn needs at least 2 classes");
    }

    conv1_.in_c = 3;
    conv1_.out_c = kConv1Channels;
    conv1_.w.resize(static_cast<std::size_t>(conv1_.out_c) * conv1_.in_c * 9);
    conv1_.b.assign(static_cast<std::size_t>(conv1_.out_c), 0.0);
    conv2_.in_c = kConv1Channels;
    conv2_.out_c = kConv2Channels;
    conv2_.w.resize(static_cast<std::size_t>(conv2_.out_c) * conv2_.in_c * 9);
    conv2_.b.assign(static_cast<std::size_t>(conv2_.out_c), 0.0);
    fc_.in_f = kConv2Channels;
    fc_.out_f = num_classes_;
    fc_.w.resize(static_cast<std::size_t>(fc_.out_f) * fc_.in_f);
    fc_.b.assign(static_cast<std::size_t>(fc_.out_f), 0.0);

    Rng rng(derive_seed(options.seed, "reference_cnn.init"));
    auto he_init = [&rng](std::vector<double>& w, int fan_in) {
        const double stddev = std::sqrt(2.0 / fan_in);
        for (auto& v : w) v = rng.normal(0.0, stddev);
    };
    he_init(conv1_.w, conv1_.in_c * 9);
    he_init(conv2_.w, conv2_.in_c * 9);
    he_init(fc_.w, fc_.in_f);

    conv1_.gw.assign(conv1_.w.size(), 0.0);
    conv1_.gb.assign(conv1_.b.size(), 0.0);
    conv2_.gw.assign(conv2_.w.size(), 0.0);
    conv2_.gb.assign(conv2_.b.size(), 0.0);
    fc_.gw.assign(fc_.w.size(), 0.0);
    fc_.gb.assign(fc_.b.size(), 0.0);

    if (options.weights) {
        load_weights(*options.weights);
    }
}

void ReferenceCnn::forward(const Image& image, Activations& act) const {
    if (image.width != resolution_ || image.height != resolution_) {
        throw std::invalid_argument("reference_cnn expects a " + std::to_string(resolution_) +
                                    "x" + std::to_string(resolution_) + " input image");
    }
    const int r = resolution_;
    act.input.assign(static_cast<std::size_t>(3) * r * r, 0.0);
    for (int y = 0; y < r; ++y) {
        for (int x = 0; x < r; ++x) {
            const Rgb c = image.at(x, y);
            act.input[(0 * static_cast<std::size_t>(r) + y) * r + x] = c.r / 255.0;
            act.input[(1 * static_cast<std::size_t>(r) + y) * r + x] = c.g / 255.0;
            act.input[(2 * static_cast<std::size_t>(r) + y) * r + x] = c.b / 255.0;
        }
    }

    conv3x3_forward(act.input, 3, r, r, conv1_.w, conv1_.b, conv1_.out_c, act.z1);
    relu_maxpool2(act.z1, conv1_.out_c, r, r, act.p1, act.arg1);
    const int r2 = r / 2;

    conv3x3_forward(act.p1, conv2_.in_c, r2, r2, conv2_.w, conv2_.b, conv2_.out_c, act.z2);
    relu_maxpool2(act.z2, conv2_.out_c, r2, r2, act.p2, act.arg2);
    const int r4 = r2 / 2;

    act.gap.assign(static_cast<std::size_t>(conv2_.out_c), 0.0);
    const double inv_area = 1.0 / (static_cast<double>(r4) * r4);
    for (int c = 0; c < conv2_.out_c; ++c) {
        double acc = 0.0;
        for (int i = 0; i < r4 * r4; ++i) {
            acc += act.p2[static_cast<std::size_t>(c) * r4 * r4 + i];
        }
        act.gap[static_cast<std::size_t>(c)] = acc * inv_area;
    }

    act.logits.assign(static_cast<std::size_t>(num_classes_), 0.0);
    for (int k = 0; k < num_classes_; ++k) {
        double acc = fc_.b[static_cast<std::size_t>(k)];
        for (int c = 0; c < fc_.in_f; ++c) {
            acc += fc_.w[static_cast<std::size_t>(k) * fc_.in_f + c] * act.gap[static_cast<std::size_t>(c)];
        }
        act.logits[static_cast<std::size_t>(k)] = acc;
    }

    const double m = *std::max_element(act.logits.begin(), act.logits.end());
    double sum = 0.0;
    act.probs.assign(static_cast<std::size_t>(num_classes_), 0.0);
    for (int k = 0; k < num_classes_; ++k) {
        act.probs[static_cast<std::size_t>(k)] = std::exp(act.logits[static_cast<std::size_t>(k)] - m);
        sum += act.probs[static_cast<std::size_t>(k)];
    }
    for (auto& p : act.probs) p /= sum;
}

double ReferenceCnn::loss_from(const Activations& act, int label) const {
    const double m = *std::max_element(act.logits.begin(), act.logits.end());
    double sum = 0.0;
    for (int k = 0; k < num_classes_; ++k) {
        sum += std::exp(act.logits[static_cast<std::size_t>(k)] - m);
    }
    return -(act.logits[static_cast<std::size_t>(label)] - m - std::log(sum));
}

void ReferenceCnn::backward(const Activations& act, int label, double scale) {
    const int r = resolution_;
    const int r2 = r / 2;
    const int r4 = r2 / 2;

    // softmax + cross-entropy
    std::vector<double> dlogits(static_cast<std::size_t>(num_classes_), 0.0);
    for (int k = 0; k < num_classes_; ++k) {
        dlogits[static_cast<std::size_t>(k)] =
            (act.probs[static_cast<std::size_t>(k)] - (k == label ? 1.0 : 0.0)) * scale;
    }

    // fc
    std::vector<double> dgap(static_cast<std::size_t>(fc_.in_f), 0.0);
    for (int k = 0; k < num_classes_; ++k) {
        const double d = dlogits[static_cast<std::size_t>(k)];
        fc_.gb[static_cast<std::size_t>(k)] += d;
        for (int c = 0; c < fc_.in_f; ++c) {
            fc_.gw[static_cast<std::size_t>(k) * fc_.in_f + c] += d * act.gap[static_cast<std::size_t>(c)];
            dgap[static_cast<std::size_t>(c)] += fc_.w[static_cast<std::size_t>(k) * fc_.in_f + c] * d;
        }
    }

    // global average pool spreads gradient uniformly
    std::vector<double> dp2(act.p2.size(), 0.0);
    const double inv_area = 1.0 / (static_cast<double>(r4) * r4);
    for (int c = 0; c < conv2_.out_c; ++c) {
        const double d = dgap[static_cast<std::size_t>(c)] * inv_area;
        for (int i = 0; i < r4 * r4; ++i) {
            dp2[static_cast<std::size_t>(c) * r4 * r4 + i] = d;
        }
    }

    // pool2 + relu2 route into conv2 pre-activations
    std::vector<double> dz2(act.z2.size(), 0.0);
    for (std::size_t i = 0; i < dp2.size(); ++i) {
        const auto zi = static_cast<std::size_t>(act.arg2[i]);
        if (act.z2[zi] > 0.0) dz2[zi] += dp2[i];
    }

    std::vector<double> dp1;
    conv3x3_backward(act.p1, conv2_.in_c, r2, r2, conv2_.w, conv2_.gw, conv2_.gb, conv2_.out_c,
                     dz2, &dp1);

    std::vector<double> dz1(act.z1.size(), 0.0);
    for (std::size_t i = 0; i < dp1.size(); ++i) {
        const auto zi = static_cast<std::size_t>(act.arg1[i]);
        if (act.z1[zi] > 0.0) dz1[zi] += dp1[i];
    }

    conv3x3_backward(act.input, 3, r, r, conv1_.w, conv1_.gw, conv1_.gb, conv1_.out_c, dz1,
                     nullptr);
}

std::vector<double> ReferenceCnn::predict(const Image& image) {
    forward(image, scratch_);
    return scratch_.probs;
}

double ReferenceCnn::batch_loss(const std::vector<const Image*>& images,
                                const std::vector<int>& labels) {
    if (images.empty() || images.size() != labels.size()) {
        throw std::invalid_argument("batch_loss: images and labels must be non-empty and equal-sized");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        forward(*images[i], scratch_);
        total += loss_from(scratch_, labels[i]);
    }
    return total / static_cast<double>(images.size());
}

double ReferenceCnn::forward_backward(const std::vector<const Image*>& images,
                                      const std::vector<int>& labels, std::size_t* correct) {
    if (images.empty() || images.size() != labels.size()) {
        throw std::invalid_argument(
            "forward_backward: images and labels must be non-empty and equal-sized");
    }
    const double scale = 1.0 / static_cast<double>(images.size());
    double total = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        forward(*images[i], scratch_);
        total += loss_from(scratch_, labels[i]);
        const auto best = static_cast<int>(
            std::max_element(scratch_.probs.begin(), scratch_.probs.end()) - scratch_.probs.begin());
        if (best == labels[i]) ++hits;
        backward(scratch_, labels[i], scale);
    }
    if (correct) *correct = hits;
    return total * scale;
}

void ReferenceCnn::zero_grad() {
    std::fill(conv1_.gw.begin(), conv1_.gw.end(), 0.0);
    std::fill(conv1_.gb.begin(), conv1_.gb.end(), 0.0);
    std::fill(conv2_.gw.begin(), conv2_.gw.end(), 0.0);
    std::fill(conv2_.gb.begin(), conv2_.gb.end(), 0.0);
    std::fill(fc_.gw.begin(), fc_.gw.end(), 0.0);
    std::fill(fc_.gb.begin(), fc_.gb.end(), 0.0);
}

std::vector<ParameterGroup> ReferenceCnn::parameters() {
    return {
        {"backbone", "conv1.w", &conv1_.w, &conv1_.gw},
        {"backbone", "conv1.b", &conv1_.b, &conv1_.gb},
        {"backbone", "conv2.w", &conv2_.w, &conv2_.gw},
        {"backbone", "conv2.b", &conv2_.b, &conv2_.gb},
        {"head", "fc.w", &fc_.w, &fc_.gw},
        {"head", "fc.b", &fc_.b, &fc_.gb},
    };
}

void ReferenceCnn::save_weights(const std::filesystem::path& dir) const {
    json j;
    j["format"] = "reference_cnn/1";
    j["input_resolution"] = resolution_;
    j["num_classes"] = num_classes_;
    j["conv1"] = {{"w", conv1_.w}, {"b", conv1_.b}};
    j["conv2"] = {{"w", conv2_.w}, {"b", conv2_.b}};
    j["fc"] = {{"w", fc_.w}, {"b", fc_.b}};
    const auto file = dir / "weights.json";
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write weights: " + file.string());
    out << j.dump() << "\n";
}

void ReferenceCnn::load_weights(const std::filesystem::path& dir) {
    const auto file = dir / "weights.json";
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read weights: " + file.string());
    json j;
    in >> j;
    if (j.value("format", "") != std::string("reference_cnn/1")) {
        throw std::runtime_error("unsupported weights format in " + file.string());
    }
    if (j.at("input_resolution").get<int>() != resolution_ ||
        j.at("num_classes").get<int>() != num_classes_) {
        throw std::runtime_error("weights shape mismatch in " + file.string());
    }
    auto read = [&](const char* key, std::vector<double>& w, std::vector<double>& b,
                    std::size_t w_size, std::size_t b_size) {
        auto jw = j.at(key).at("w").get<std::vector<double>>();
        auto jb = j.at(key).at("b").get<std::vector<double>>();
        if (jw.size() != w_size || jb.size() != b_size) {
            throw std::runtime_error(std::string("weights size mismatch for ") + key);
        }
        w = std::move(jw);
        b = std::move(jb);
    };
    read("conv1", conv1_.w, conv1_.b, conv1_.w.size(), conv1_.b.size());
    read("conv2", conv2_.w, conv2_.b, conv2_.w.size(), conv2_.b.size());
    read("fc", fc_.w, fc_.b, fc_.w.size(), fc_.b.size());
}

}  // namespace hema
