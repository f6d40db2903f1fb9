#pragma once

#include <vector>

#include "hema/backend.hpp"

namespace hema {

// Self-contained conv-pool classifier with a softmax head and
// cross-entropy loss. Small enough to train on a CPU in seconds, which
// keeps every pipeline stage runnable without an external model stack.
//
// conv 3x3 (3->8) + relu + maxpool2
// conv 3x3 (8->16) + relu + maxpool2
// global average pool
// fc (16 -> num_classes) + softmax
//
// Conv layers form the "backbone" parameter group, the fc layer the
// "head"; freezing the backbone leaves conv parameters untouched.
class ReferenceCnn : public ClassifierBackend {
public:
    explicit ReferenceCnn(const BackendOptions& options);

    std::string name() const override { return "reference_cnn"; }
    int input_resolution() const override { return resolution_; }
    int num_classes() const override { return num_classes_; }

    std::vector<double> predict(const Image& image) override;
    double batch_loss(const std::vector<const Image*>& images,
                      const std::vector<int>& labels) override;
    double forward_backward(const std::vector<const Image*>& images,
                            const std::vector<int>& labels,
                            std::size_t* correct = nullptr) override;

    void zero_grad() override;
    std::vector<ParameterGroup> parameters() override;

    void save_weights(const std::filesystem::path& dir) const override;
    void load_weights(const std::filesystem::path& dir) override;

    static constexpr int kDefaultResolution = 224;
    static constexpr int kConv1Channels = 8;
    static constexpr int kConv2Channels = 16;

private:
    struct Conv {
        int in_c = 0;
        int out_c = 0;
        std::vector<double> w, b, gw, gb;
    };
    struct Fc {
        int in_f = 0;
        int out_f = 0;
        std::vector<double> w, b, gw, gb;
    };

    struct Activations {
        std::vector<double> input;             // 3 x R x R
        std::vector<double> z1, p1;            // conv1 pre-act, pooled
        std::vector<int> arg1;
        std::vector<double> z2, p2;            // conv2 pre-act, pooled
        std::vector<int> arg2;
        std::vector<double> gap;               // kConv2Channels
        std::vector<double> logits, probs;
    };

    void forward(const Image& image, Activations& act) const;
    // Accumulates gradients scaled by `scale` (1/batch).
    void backward(const Activations& act, int label, double scale);
    double loss_from(const Activations& act, int label) const;

    int resolution_ = kDefaultResolution;
    int num_classes_ = 2;
    Conv conv1_, conv2_;
    Fc fc_;
    Activations scratch_;
};

}  // namespace hema
